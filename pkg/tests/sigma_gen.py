"""Type-directed random generation of well-typed SIGMA_PI judgements.

Terms are built toward a requested type; every candidate is re-checked by the
kernel before use, so the generator only has to be right most of the time.
"""

from __future__ import annotations

import pathlib
import random

from tfkernel import syntax
from tfkernel.arity import BASE, n_ary
from tfkernel.tf_check import CheckFailure, Kernel, Specification, _match, rewrite_step
from tfkernel.tf_core import (
    TYPE,
    Abstraction,
    ArityError,
    BaseKind,
    Context,
    Object,
    ProductKind,
    alpha_eq,
    free_vars,
    instantiate_seq,
    kind,
    rebind_away,
    var,
)

FIXTURES = pathlib.Path(syntax.__file__).parent / "fixtures"


def load_sigma_pi() -> Specification:
    return syntax.parse_file((FIXTURES / "sigma_pi.tft").read_text()).spec


UNARY = n_ary(1)
SIGMA_PI = load_sigma_pi()
PI, LAM, APP = (SIGMA_PI.constant(n).symbol for n in ("Pi", "lam", "app"))


def ab(m: Object, *binders) -> Abstraction:
    return Abstraction(tuple(binders), m)


def o(head, *args) -> Object:
    return Object(head, tuple(a if isinstance(a, Abstraction) else ab(a) for a in args))


class SigmaGen:
    def __init__(self, seed: int, spec: Specification = SIGMA_PI):
        self.rng = random.Random(seed)
        self.spec = spec
        self.kernel = Kernel(spec)
        self.n = 0

    def fresh(self, stem: str, arity=BASE):
        self.n += 1
        return var(f"{stem}{self.n}", arity)

    # contexts of order <= 2

    def context(self, size: int | None = None) -> Context:
        size = size or self.rng.randint(2, 5)
        a = var("A")
        entries = [(a, kind(TYPE))]
        ctx = Context(tuple(entries))
        for i in range(size - 1):
            choice = self.rng.random()
            if i == 0 and choice < 0.6:
                choice = 0.3  # usually start with a type family over A
            if choice < 0.2:
                x = self.fresh("T")
                k = kind(TYPE)
            elif choice < 0.4:
                x = self.fresh("B", UNARY)
                s = self.type_(ctx, 1)
                y = self.fresh("y")
                k = ProductKind(Context(((y, kind(BaseKind(s))),)), TYPE)
            elif choice < 0.75:
                x = self.fresh("a")
                k = kind(BaseKind(self.type_(ctx, 2)))
            else:
                s = self.type_(ctx, 1)
                y = self.fresh("y")
                inner = ctx.extend(y, kind(BaseKind(s)))
                x = self.fresh("f", UNARY)
                k = ProductKind(Context(((y, kind(BaseKind(s))),)), BaseKind(self.type_(inner, 1)))
            ctx = ctx.extend(x, k)
        return ctx

    # types

    def type_(self, ctx: Context, depth: int) -> Object:
        options = [x for x, k in ctx.entries if k.is_base and k.target.is_type]
        fams = [(x, k) for x, k in ctx.entries if not k.is_base and k.target.is_type]
        r = self.rng.random()
        if depth > 0 and r < 0.25:
            s = self.type_(ctx, depth - 1)
            y = self.fresh("x")
            t = self.type_(ctx.extend(y, kind(BaseKind(s))), depth - 1)
            return o(PI, s, ab(t, y))
        if fams and depth > 0 and r < 0.55:
            x, k = self.rng.choice(fams)
            args = self.args_for(ctx, k, depth - 1)
            if args is not None:
                return Object(x, args)
        return Object(self.rng.choice(options), ())

    def args_for(self, ctx: Context, k: ProductKind, depth: int, solved=None):
        if depth < 0 and k.telescope.entries:
            return None
        args = []
        for i, (x, kx) in enumerate(k.telescope.entries):
            if solved and x in solved:
                args.append(solved[x])
                continue
            want = instantiate_seq(tuple(args), k.telescope.dom[:i], kx)
            f = self.abstraction(ctx, want, depth)
            if f is None:
                return None
            args.append(f)
        return tuple(args)

    def abstraction(self, ctx: Context, k: ProductKind, depth: int) -> Abstraction | None:
        k = rebind_away(k, ctx.names)
        inner = ctx + k.telescope
        if k.target.is_type:
            return Abstraction(k.telescope.dom, self.type_(inner, depth))
        m = self.term(inner, k.target.carrier, depth)
        return None if m is None else Abstraction(k.telescope.dom, m)

    # terms

    def term(self, ctx: Context, t: Object, depth: int) -> Object | None:
        """An object of kind El(t), or None."""
        moves = ["head"] * 3
        if depth > 0:
            moves += ["redex", "app"]
            if t.head == PI:
                moves += ["lam"] * 3
        self.rng.shuffle(moves)
        for move in moves:
            m = getattr(self, "_" + move)(ctx, t, depth)
            if m is not None:
                return m
        return None

    def _head(self, ctx, t, depth):
        cands = []
        for x, k in ctx.entries:
            if k.target.is_type or (depth == 0 and not k.is_base):
                continue
            metas = set(k.telescope.dom)
            sigma = {}
            if _match(k.target.carrier, t, metas, {}, [], [], sigma):
                cands.append((x, k, sigma))
        self.rng.shuffle(cands)
        for x, k, sigma in cands:
            args = self.args_for(ctx, k, depth - 1, sigma)
            if args is not None:
                return Object(x, args)
        return None

    def _lam(self, ctx, t, depth):
        s, fam = t.args[0].body, t.args[1]
        y = self.fresh("x")
        body_t = instantiate_seq((ab(Object(y, ())),), fam.binders, fam.body)
        body = self.term(ctx.extend(y, kind(BaseKind(s))), body_t, depth - 1)
        if body is None:
            return None
        fam2 = ab(body_t, y)
        return o(LAM, s, fam2, ab(body, y))

    def _fam(self, t):
        y = self.fresh("x")
        return ab(t, y)  # constant family: y does not occur in t

    def inhabited(self, ctx, t) -> Object:
        """A type likely to have inhabitants: t itself or a variable's type."""
        pool = [t] + [k.target.carrier for _, k in ctx.entries if k.is_base and not k.target.is_type]
        return self.rng.choice(pool)

    def _redex(self, ctx, t, depth):
        s = self.inhabited(ctx, t)
        a = self.term(ctx, s, depth - 1)
        if a is None:
            return None
        y = self.fresh("x")
        body = self.term(ctx.extend(y, kind(BaseKind(s))), t, depth - 1)
        if body is None:
            return None
        fam = self._fam(t)
        return o(APP, s, fam, o(LAM, s, fam, ab(body, y)), a)

    def _app(self, ctx, t, depth):
        s = self.inhabited(ctx, t)
        a = self.term(ctx, s, depth - 1)
        if a is None:
            return None
        fam = self._fam(t)
        g = self.term(ctx, o(PI, s, fam), depth - 1)
        if g is None:
            return None
        return o(APP, s, fam, g, a)

    # judgements

    def typed(self, depth: int = 3, ctx: Context | None = None):
        """A context, an object and its type t with ctx |- m : El t checked."""
        for _ in range(50):
            c = ctx if ctx is not None else self.context()
            t = self.type_(c, 2)
            m = self.term(c, t, depth)
            if m is None:
                continue
            try:
                self.kernel.check(c, m, BaseKind(t))
            except (CheckFailure, ArityError):
                continue
            return c, m, BaseKind(t)
        raise RuntimeError("generator could not produce a typed object")

    def walk(self, m: Object, steps: int) -> Object:
        """A random rewriting descendant of m."""
        for _ in range(steps):
            nxt = rewrite_step(self.spec, None, m)
            if not nxt:
                break
            m = self.rng.choice(nxt)[0]
        return m

    def equation(self, depth: int = 3):
        """ctx, m, n, t with m and n joinable by rewriting."""
        for _ in range(10):
            c, m, t = self.typed(depth)
            if rewrite_step(self.spec, c, m):
                break
        a = m if self.rng.random() < 0.5 else self.walk(m, 1)
        b = self.walk(m, self.rng.randint(1, 4))
        return c, a, b, t

    def convertible_type(self, ctx: Context, depth: int = 2):
        """Two convertible types, the second a reduct of the first."""
        s = self.type_(ctx, depth)
        fams = [(x, k) for x, k in ctx.entries if not k.is_base and k.target.is_type]
        if fams and self.rng.random() < 0.7:
            x, k = self.rng.choice(fams)
            want = k.telescope.entries[0][1].target.carrier
            arg = self._redex(ctx, want, 2)
            if arg is not None:
                s = Object(x, (ab(arg),))
        return s, self.walk(s, 4)


def gen_pi_equalities(seed: int, count: int):
    """Derivable equalities Pi S F = Pi S' F' : Type, with their derivations."""
    g = SigmaGen(seed)
    out = []
    while len(out) < count:
        c = g.context()
        s, s2 = g.convertible_type(c)
        y = g.fresh("x")
        inner = c.extend(y, kind(BaseKind(s)))
        t, t2 = g.convertible_type(inner)
        left = o(PI, s, ab(t, y))
        right = o(PI, s2, ab(t2, y))
        if g.rng.random() < 0.3:
            left, right = right, left
        d = g.kernel.equal(c, left, right, TYPE)
        if d is not None:
            out.append((c, left, right, d))
    return out, g.kernel


def mentions(m, x) -> bool:
    return x in free_vars(m)


__all__ = ["SigmaGen", "SIGMA_PI", "gen_pi_equalities", "load_sigma_pi", "alpha_eq"]
