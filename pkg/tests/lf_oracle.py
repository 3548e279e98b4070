"""Reference de Bruijn implementation of untyped lambda terms, used as an
oracle for LF substitution, normalisation and the NF readback.

Terms: ("b", i) bound index, ("f", name) free variable, ("c", name) constant,
("lam", body), ("app", fun, arg).  Annotations are dropped.
"""

from __future__ import annotations

from tfkernel import lf
from tfkernel.arity import Arity
from tfkernel.tf_core import Abstraction, Object, const, var


def to_db(k, env=()):
    match k:
        case lf.LFVar(n):
            return ("b", env.index(n)) if n in env else ("f", n)
        case lf.LFConst(n):
            return ("c", n)
        case lf.LFLam(x, _, body):
            return ("lam", to_db(body, (x,) + tuple(env)))
        case lf.LFApp(f, a):
            return ("app", to_db(f, env), to_db(a, env))
    raise TypeError(k)


def shift(t, d, cutoff=0):
    match t:
        case ("b", i):
            return ("b", i + d) if i >= cutoff else t
        case ("lam", b):
            return ("lam", shift(b, d, cutoff + 1))
        case ("app", f, a):
            return ("app", shift(f, d, cutoff), shift(a, d, cutoff))
    return t


def subst(t, j, s):
    """[s/j]t"""
    match t:
        case ("b", i):
            return s if i == j else t
        case ("lam", b):
            return ("lam", subst(b, j + 1, shift(s, 1)))
        case ("app", f, a):
            return ("app", subst(f, j, s), subst(a, j, s))
    return t


def subst_free(t, name, s, depth=0):
    match t:
        case ("f", n) if n == name:
            return shift(s, depth)
        case ("lam", b):
            return ("lam", subst_free(b, name, s, depth + 1))
        case ("app", f, a):
            return ("app", subst_free(f, name, s, depth), subst_free(a, name, s, depth))
    return t


def beta(body, arg):
    return shift(subst(body, 0, shift(arg, 1)), -1)


def normalize(t, fuel=10_000):
    """Normal-order beta normal form."""
    budget = [fuel]

    def go(t):
        match t:
            case ("lam", b):
                return ("lam", go(b))
            case ("app", f, a):
                f = whnf(f)
                if f[0] == "lam":
                    tick()
                    return go(beta(f[1], a))
                return ("app", go(f), go(a))
        return t

    def whnf(t):
        while t[0] == "app":
            f = whnf(t[1])
            if f[0] != "lam":
                return ("app", f, t[2])
            tick()
            t = beta(f[1], t[2])
        return t

    def tick():
        budget[0] -= 1
        if budget[0] < 0:
            raise RuntimeError("oracle ran out of fuel")

    return go(t)


def eta_normalize(t):
    match t:
        case ("lam", b):
            b = eta_normalize(b)
            if b[0] == "app" and b[2] == ("b", 0) and not _mentions(b[1], 0):
                return shift(b[1], -1)
            return ("lam", b)
        case ("app", f, a):
            return ("app", eta_normalize(f), eta_normalize(a))
    return t


def _mentions(t, i):
    match t:
        case ("b", j):
            return i == j
        case ("lam", b):
            return _mentions(b, i + 1)
        case ("app", f, a):
            return _mentions(f, i) or _mentions(a, i)
    return False


def kind_arity(k) -> Arity:
    kids = []
    while isinstance(k, lf.LFPi):
        kids.append(kind_arity(k.domain))
        k = k.codomain
    return Arity(tuple(kids))


def readback(t, arity: Arity, env: list, free: dict, consts: dict, n=None) -> Abstraction:
    """The TF abstraction of a beta-normal t at the given arity, eta-expanding
    as needed.  env lists (name, arity) for bound indices, innermost first."""
    n = n if n is not None else [0]

    def fresh():
        n[0] += 1
        return f"r{n[0]}"

    binders = []
    env = list(env)
    for child in arity.children:
        if t[0] == "lam":
            t = t[1]
        else:
            t = ("app", shift(t, 1), ("b", 0))
        b = var(fresh(), child)
        binders.append(b)
        env.insert(0, (b.name, child))
    head, args = t, []
    while head[0] == "app":
        args.append(head[2])
        head = head[1]
    args.reverse()
    match head:
        case ("b", i):
            name, ar = env[i]
            sym = var(name, ar)
        case ("f", name):
            sym = var(name, free[name])
        case ("c", name):
            sym = const(name, consts[name])
        case _:
            raise ValueError("not beta-normal")
    kids = [readback(a, c, env, free, consts, n) for a, c in zip(args, sym.arity.children)]
    return Abstraction(tuple(binders), Object(sym, tuple(kids)))


def nf_oracle(ctx: lf.LFContext, spec: lf.LFSpecification, k, kind) -> Abstraction:
    free = {x: kind_arity(t) for x, t in ctx.entries}
    consts = {d.name: kind_arity(d.kind) for d in spec.constants}
    return readback(normalize(to_db(k)), kind_arity(kind), [], free, consts)
