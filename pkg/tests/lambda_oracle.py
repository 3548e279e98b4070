"""Reference semantics for TF instantiation via the untyped lambda calculus.

Terms use de Bruijn indices so that nothing here shares code with the
named, hereditary implementation under test.  A TF object is encoded as a
curried application, an abstraction as nested lambdas; after substitution the
term is beta-normalised and read back at the expected arity, eta-expanding
where needed.
"""

from __future__ import annotations

from tfkernel.arity import Arity
from tfkernel.tf_core import VARIABLE, Abstraction, Object, Symbol

# term shapes: ("fv", Symbol) | ("bv", k) | ("lam", body) | ("app", f, a)


def encode(x, env: list[Symbol] | None = None):
    env = list(env or [])
    match x:
        case Object(head, args):
            if head in env:
                t = ("bv", len(env) - 1 - _last_index(env, head))
            else:
                t = ("fv", head)
            for a in args:
                t = ("app", t, encode(a, env))
            return t
        case Abstraction(binders, body, _):
            inner = encode(body, env + list(binders))
            for _ in binders:
                inner = ("lam", inner)
            return inner
    raise TypeError(type(x).__name__)


def _last_index(env, s):
    for i in range(len(env) - 1, -1, -1):
        if env[i] == s:
            return i
    raise KeyError(s)


def shift(t, d: int, cutoff: int = 0):
    match t:
        case ("bv", k):
            return ("bv", k + d) if k >= cutoff else t
        case ("fv", _):
            return t
        case ("lam", b):
            return ("lam", shift(b, d, cutoff + 1))
        case ("app", f, a):
            return ("app", shift(f, d, cutoff), shift(a, d, cutoff))


def subst_bv(t, j: int, s):
    match t:
        case ("bv", k):
            if k == j:
                return s
            return ("bv", k - 1) if k > j else t
        case ("fv", _):
            return t
        case ("lam", b):
            return ("lam", subst_bv(b, j + 1, shift(s, 1)))
        case ("app", f, a):
            return ("app", subst_bv(f, j, s), subst_bv(a, j, s))


def subst_fv(t, x: Symbol, s, depth: int = 0):
    match t:
        case ("fv", y):
            return shift(s, depth) if y == x else t
        case ("bv", _):
            return t
        case ("lam", b):
            return ("lam", subst_fv(b, x, s, depth + 1))
        case ("app", f, a):
            return ("app", subst_fv(f, x, s, depth), subst_fv(a, x, s, depth))


def normalize(t, fuel: int = 100000):
    """Normal-order beta normalisation."""
    steps = [0]

    def go(t):
        steps[0] += 1
        if steps[0] > fuel:
            raise RuntimeError("oracle normalisation ran out of fuel")
        match t:
            case ("lam", b):
                return ("lam", go(b))
            case ("app", f, a):
                f = whnf(f)
                if f[0] == "lam":
                    return go(subst_bv(f[1], 0, a))
                return ("app", go(f), go(a))
        return t

    def whnf(t):
        while True:
            steps[0] += 1
            if steps[0] > fuel:
                raise RuntimeError("oracle normalisation ran out of fuel")
            if t[0] == "app":
                f = whnf(t[1])
                if f[0] == "lam":
                    t = subst_bv(f[1], 0, t[2])
                    continue
                return ("app", f, t[2])
            return t

    return go(t)


def readback(t, arity: Arity, env: list[Symbol] | None = None, depth: int = 0) -> Abstraction:
    """Read a beta-normal term back as an eta-long abstraction of the given arity."""
    env = list(env or [])
    binders = []
    for i, a in enumerate(arity.children):
        binders.append(Symbol(f"#r{len(env) + i}", VARIABLE, a))
    n = len(binders)
    # eta-expand: shift t under n new lambdas after peeling existing ones
    body = t
    peeled = 0
    while peeled < n and body[0] == "lam":
        body = body[1]
        peeled += 1
    body = shift(body, n - peeled)
    for i in range(peeled, n):
        body = ("app", body, ("bv", n - 1 - i))
    body = normalize(body)
    return Abstraction(tuple(binders), _read_obj(body, env + binders))


def _read_obj(t, env: list[Symbol]) -> Object:
    spine = []
    while t[0] == "app":
        spine.append(t[2])
        t = t[1]
    spine.reverse()
    match t:
        case ("fv", s):
            head = s
        case ("bv", k):
            head = env[len(env) - 1 - k]
        case _:
            raise ValueError("term is not beta-normal")
    kids = head.arity.children
    if len(kids) != len(spine):
        raise ValueError(f"{head.name} applied to {len(spine)} arguments, arity {head.arity}")
    return Object(head, tuple(readback(s, a, env) for s, a in zip(spine, kids)))


def oracle_instantiate(f: Abstraction, x: Symbol, n: Object) -> Object:
    t = normalize(subst_fv(encode(n), x, encode(f)))
    return readback(t, Arity()).body


def oracle_instantiate_abs(f: Abstraction, x: Symbol, g: Abstraction) -> Abstraction:
    t = normalize(subst_fv(encode(g), x, encode(f)))
    return readback(t, g.arity)


def oracle_simultaneous(fs, xs, n: Object) -> Object:
    # substitute fresh placeholders first so that the values cannot interfere
    t = encode(n)
    holes = []
    for i, x in enumerate(xs):
        h = Symbol(f"#hole{i}", VARIABLE, x.arity)
        holes.append(h)
        t = subst_fv(t, x, ("fv", h))
    for h, f in zip(holes, fs):
        t = subst_fv(t, h, encode(f))
    return readback(normalize(t), Arity()).body


def oracle_employ(f: Abstraction, g: Abstraction) -> Abstraction:
    from tfkernel.arity import Arity as A

    t = normalize(("app", encode(f), encode(g)))
    return readback(t, A(f.arity.children[1:]))


def oracle_eta(z: Symbol) -> Abstraction:
    return readback(("fv", z), z.arity)


def oracle_free_vars(x) -> set[Symbol]:
    out: set[Symbol] = set()

    def go(t):
        match t:
            case ("fv", s):
                if s.sort == VARIABLE:
                    out.add(s)
            case ("lam", b):
                go(b)
            case ("app", f, a):
                go(f)
                go(a)

    go(normalize(encode(x)))
    return out
