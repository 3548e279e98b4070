"""The traditional framework LF: syntax, beta-eta reduction, algorithmic
checking, the arity assignment, the translations lift (TF_k to LF) and NF (LF
to TF), the simply typed image used for strong normalisation, and reduction
probes.

Variables and constants are plain names here; NF turns them into TF symbols
with the arity the assignment gives them.
"""

from __future__ import annotations

import dataclasses
import typing
from collections import deque

from tfkernel.arity import BASE, Arity
from tfkernel.tf_core import (
    EMPTY,
    TYPE,
    Abstraction,
    ArityError,
    BaseKind,
    Context,
    Object,
    ProductKind,
    alpha_eq,
    const,
    employ,
    eta_long,
    fresh,
    rebind_away,
    var,
)
from tfkernel.tf_check import (
    AbsEq,
    AbsTyping,
    ConstDecl,
    DefinedJudgement,
    EqDecl,
    Equality,
    Judgement,
    KindEq,
    KindWf,
    Specification,
    Typing,
    Valid,
    VALID,
)

# ---------------------------------------------------------------------------
# syntax


@dataclasses.dataclass(frozen=True)
class LFVar:
    name: str

    def __str__(self):
        return self.name


@dataclasses.dataclass(frozen=True)
class LFConst:
    name: str

    def __str__(self):
        return self.name


@dataclasses.dataclass(frozen=True)
class LFLam:
    binder: str
    annotation: "LFKind"
    body: "LFObject"

    def __str__(self):
        return f"(\\{self.binder} : {self.annotation}. {self.body})"


@dataclasses.dataclass(frozen=True)
class LFApp:
    fun: "LFObject"
    arg: "LFObject"

    def __str__(self):
        return f"({self.fun} {self.arg})"


LFObject = typing.Union[LFVar, LFConst, LFLam, LFApp]


@dataclasses.dataclass(frozen=True)
class LFType:
    def __str__(self):
        return "Type"


@dataclasses.dataclass(frozen=True)
class LFEl:
    carrier: LFObject

    def __str__(self):
        return f"El {self.carrier}"


@dataclasses.dataclass(frozen=True)
class LFPi:
    binder: str
    domain: "LFKind"
    codomain: "LFKind"

    def __str__(self):
        return f"({self.binder} : {self.domain}) {self.codomain}"


LFKind = typing.Union[LFType, LFEl, LFPi]
LTYPE = LFType()


@dataclasses.dataclass(frozen=True)
class LFContext:
    entries: tuple[tuple[str, LFKind], ...] = ()

    def __len__(self):
        return len(self.entries)

    def __add__(self, other: LFContext) -> LFContext:
        return LFContext(self.entries + other.entries)

    def extend(self, x: str, k: LFKind) -> LFContext:
        return LFContext(self.entries + ((x, k),))

    def lookup(self, x: str) -> LFKind | None:
        for n, k in reversed(self.entries):
            if n == x:
                return k
        return None

    @property
    def names(self) -> set[str]:
        return {n for n, _ in self.entries}

    def prefix(self, n: int) -> LFContext:
        return LFContext(self.entries[:n])

    def __str__(self):
        return ", ".join(f"{n} : {k}" for n, k in self.entries)


LEMPTY = LFContext()


@dataclasses.dataclass(frozen=True)
class LFValid:
    pass


@dataclasses.dataclass(frozen=True)
class LFKindWf:
    kind: LFKind


@dataclasses.dataclass(frozen=True)
class LFTyping:
    term: LFObject
    kind: LFKind


@dataclasses.dataclass(frozen=True)
class LFObjEq:
    left: LFObject
    right: LFObject
    kind: LFKind


@dataclasses.dataclass(frozen=True)
class LFKindEq:
    left: LFKind
    right: LFKind


LFBody = typing.Union[LFValid, LFKindWf, LFTyping, LFObjEq, LFKindEq]


@dataclasses.dataclass(frozen=True)
class LFJudgement:
    context: LFContext
    body: LFBody


@dataclasses.dataclass(frozen=True)
class LFConstDecl:
    name: str
    kind: LFKind
    is_lf_declaration: typing.ClassVar[bool] = True

    @property
    def ident(self) -> str:
        return self.name


@dataclasses.dataclass(frozen=True)
class LFEqDecl:
    """A computation rule (context)(left = right : kind)."""

    ident: str
    context: LFContext
    left: LFObject
    right: LFObject
    kind: LFKind
    is_lf_declaration: typing.ClassVar[bool] = True


@dataclasses.dataclass(frozen=True)
class LFSpecification:
    declarations: tuple = ()

    def constant_kind(self, name: str) -> LFKind | None:
        for d in self.declarations:
            if isinstance(d, LFConstDecl) and d.name == name:
                return d.kind
        return None

    @property
    def constants(self) -> list[LFConstDecl]:
        return [d for d in self.declarations if isinstance(d, LFConstDecl)]

    @property
    def equations(self) -> list[LFEqDecl]:
        return [d for d in self.declarations if isinstance(d, LFEqDecl)]


class LFError(ValueError):
    pass


class FuelExhausted(LFError):
    def __init__(self, message: str, last=None):
        super().__init__(message)
        self.last = last


# ---------------------------------------------------------------------------
# names and substitution


def lf_free_vars(x) -> frozenset[str]:
    match x:
        case LFVar(n):
            return frozenset((n,))
        case LFConst() | LFType():
            return frozenset()
        case LFLam(b, k, body) | LFPi(b, k, body):
            return lf_free_vars(k) | (lf_free_vars(body) - {b})
        case LFApp(f, a):
            return lf_free_vars(f) | lf_free_vars(a)
        case LFEl(c):
            return lf_free_vars(c)
        case LFContext(entries):
            out: set[str] = set()
            bound: set[str] = set()
            for n, k in entries:
                out |= lf_free_vars(k) - bound
                bound.add(n)
            return frozenset(out)
    raise TypeError(f"free variables of {type(x).__name__}")


def lf_names(x) -> set[str]:
    match x:
        case LFVar(n) | LFConst(n):
            return {n}
        case LFType():
            return set()
        case LFLam(b, k, body) | LFPi(b, k, body):
            return {b} | lf_names(k) | lf_names(body)
        case LFApp(f, a):
            return lf_names(f) | lf_names(a)
        case LFEl(c):
            return lf_names(c)
    raise TypeError(type(x).__name__)


def lf_subst(x, sigma: dict[str, LFObject]):
    """Simultaneous capture-avoiding substitution."""
    if not sigma:
        return x
    match x:
        case LFVar(n):
            return sigma.get(n, x)
        case LFConst() | LFType():
            return x
        case LFApp(f, a):
            return LFApp(lf_subst(f, sigma), lf_subst(a, sigma))
        case LFEl(c):
            return LFEl(lf_subst(c, sigma))
        case LFLam(b, k, body) | LFPi(b, k, body):
            k2 = lf_subst(k, sigma)
            inner = {n: v for n, v in sigma.items() if n != b}
            live = {n: v for n, v in inner.items() if n in lf_free_vars(body)}
            b2 = b
            if live:
                danger = set().union(*(lf_free_vars(v) for v in live.values()))
                if b in danger:
                    b2 = fresh(b, danger | lf_names(body) | set(sigma))
                    inner[b] = LFVar(b2)
            body2 = lf_subst(body, inner) if inner else body
            return type(x)(b2, k2, body2)
    raise TypeError(f"substitution into {type(x).__name__}")


def lf_substitute(k, x: str, v: LFObject):
    """[v/x]k."""
    return lf_subst(k, {x: v})


def _canon(x, env: dict[str, int], depth: int, annotations: bool):
    match x:
        case LFVar(n):
            return ("b", depth - env[n]) if n in env else ("v", n)
        case LFConst(n):
            return ("c", n)
        case LFType():
            return ("T",)
        case LFEl(c):
            return ("El", _canon(c, env, depth, annotations))
        case LFApp(f, a):
            return ("@", _canon(f, env, depth, annotations), _canon(a, env, depth, annotations))
        case LFLam(b, k, body) | LFPi(b, k, body):
            tag = "\\" if isinstance(x, LFLam) else "Pi"
            ann = _canon(k, env, depth, annotations) if annotations or tag == "Pi" else None
            inner = dict(env)
            inner[b] = depth + 1
            return (tag, ann, _canon(body, inner, depth + 1, annotations))
        case LFContext(entries):
            out = []
            env = dict(env)
            for n, k in entries:
                out.append(_canon(k, env, depth, annotations))
                depth += 1
                env[n] = depth
            return ("ctx", tuple(out))
    raise TypeError(type(x).__name__)


def lf_canon(x, annotations: bool = True):
    return _canon(x, {}, 0, annotations)


def lf_alpha_eq(a, b, annotations: bool = True) -> bool:
    return a is b or lf_canon(a, annotations) == lf_canon(b, annotations)


def lf_size(x) -> int:
    match x:
        case LFVar() | LFConst() | LFType():
            return 1
        case LFEl(c):
            return 1 + lf_size(c)
        case LFApp(f, a):
            return 1 + lf_size(f) + lf_size(a)
        case LFLam(_, k, body) | LFPi(_, k, body):
            return 1 + lf_size(k) + lf_size(body)
    raise TypeError(type(x).__name__)


def spine(k: LFObject) -> tuple[LFObject, list[LFObject]]:
    args = []
    while isinstance(k, LFApp):
        args.append(k.arg)
        k = k.fun
    return k, args[::-1]


def apply_all(head: LFObject, args) -> LFObject:
    for a in args:
        head = LFApp(head, a)
    return head


# ---------------------------------------------------------------------------
# positions: applications have the function at 0 and the argument at 1; a
# lambda has its body at 0.  Annotations are never reduction positions.

Position = tuple[int, ...]


def subterm_at(k: LFObject, pos: Position) -> LFObject:
    for i in pos:
        match k:
            case LFApp(f, a):
                k = f if i == 0 else a
            case LFLam(_, _, body):
                k = body
            case _:
                raise LFError(f"no position {pos}")
    return k


def replace_at(k: LFObject, pos: Position, new: LFObject) -> LFObject:
    if not pos:
        return new
    i, rest = pos[0], pos[1:]
    match k:
        case LFApp(f, a):
            return LFApp(replace_at(f, rest, new), a) if i == 0 else LFApp(f, replace_at(a, rest, new))
        case LFLam(b, ann, body):
            return LFLam(b, ann, replace_at(body, rest, new))
    raise LFError(f"no position {pos}")


def positions(k: LFObject, here: Position = ()) -> typing.Iterator[Position]:
    """Pre-order: outermost first, then left to right."""
    yield here
    match k:
        case LFApp(f, a):
            yield from positions(f, here + (0,))
            yield from positions(a, here + (1,))
        case LFLam(_, _, body):
            yield from positions(body, here + (0,))


# ---------------------------------------------------------------------------
# beta and eta


BETA, ETA = "beta", "eta"


def _contract(k: LFObject) -> list[tuple[LFObject, str]]:
    out = []
    match k:
        case LFApp(LFLam(x, _, body), a):
            out.append((lf_substitute(body, x, a), BETA))
        case LFLam(x, _, LFApp(f, LFVar(y))) if y == x and x not in lf_free_vars(f):
            out.append((f, ETA))
    return out


def beta_eta_step(k: LFObject) -> list[tuple[LFObject, str, Position]]:
    """Every one-step beta or eta reduct, with its rule and position."""
    out = []
    for pos in positions(k):
        for red, rule in _contract(subterm_at(k, pos)):
            out.append((replace_at(k, pos, red), rule, pos))
    return out


def _first_redex(k: LFObject, rule: str, innermost: bool) -> LFObject | None:
    """Contract the leftmost-outermost (or leftmost-innermost) redex of rule."""
    def has(t):
        return any(r == rule for _, r in _contract(t))

    for pos in positions(k):
        sub = subterm_at(k, pos)
        if not has(sub):
            continue
        if innermost and any(has(subterm_at(sub, p)) for p in positions(sub) if p):
            continue
        return replace_at(k, pos, next(red for red, r in _contract(sub) if r == rule))
    return None


def normalize_beta_eta(k: LFObject, fuel: int = 64, strategy: str = "leftmost") -> LFObject:
    """beta to normal form, then eta, one redex at a time; each step costs one
    unit of fuel.  Raises FuelExhausted."""
    innermost = strategy == "innermost"
    left = fuel
    for rule in (BETA, ETA):
        while True:
            nxt = _first_redex(k, rule, innermost)
            if nxt is None:
                break
            if left <= 0:
                raise FuelExhausted(f"normalisation ran out of fuel after {fuel} steps", k)
            left -= 1
            k = nxt
    return k


def normalize_beta(k: LFObject, fuel: int = 64) -> LFObject:
    for _ in range(fuel + 1):
        nxt = _first_redex(k, BETA, False)
        if nxt is None:
            return k
        k = nxt
    raise FuelExhausted(f"beta normalisation ran out of fuel after {fuel} steps", k)


def eta_long_form(spec: LFSpecification, ctx: LFContext, k: LFObject, kind: LFKind) -> LFObject:
    """The eta-long form of a beta-normal object at the given kind.  Only the
    product structure of kinds is consulted, so k need not be checked; shape
    mismatches raise LFError."""
    match kind:
        case LFPi(x, a, b):
            avoid = ctx.names | lf_free_vars(kind) | lf_names(k)
            if isinstance(k, LFLam):
                y, ann, body = k.binder, k.annotation, k.body
                if y in ctx.names or y in lf_free_vars(kind):
                    y2 = fresh(y, avoid)
                    body, y = lf_substitute(body, y, LFVar(y2)), y2
            else:
                y, ann = fresh("z", avoid), a
                body = LFApp(k, LFVar(y))
            inner = eta_long_form(spec, ctx.extend(y, ann), body, lf_substitute(b, x, LFVar(y)))
            return LFLam(y, ann, inner)
    head, args = spine(k)
    match head:
        case LFVar(n):
            hk = ctx.lookup(n)
        case LFConst(n):
            hk = spec.constant_kind(n)
        case _:
            raise LFError(f"{k} is not beta-normal")
    if hk is None:
        raise LFError(f"unknown symbol {head}")
    out = head
    for arg in args:
        if not isinstance(hk, LFPi):
            raise LFError(f"{head} is applied to too many arguments")
        out = LFApp(out, eta_long_form(spec, ctx, arg, hk.domain))
        hk = lf_substitute(hk.codomain, hk.binder, arg)
    if isinstance(hk, LFPi):
        raise LFError(f"{k} is not of base kind")
    return out


def long_normal(spec: LFSpecification, ctx: LFContext, k: LFObject, kind: LFKind, fuel: int = 64) -> LFObject:
    """beta-normal eta-long form."""
    return eta_long_form(spec, ctx, normalize_beta(k, fuel), kind)


def normalize_kind(k: LFKind, fuel: int = 64) -> LFKind:
    match k:
        case LFType():
            return k
        case LFEl(c):
            return LFEl(normalize_beta_eta(c, fuel))
        case LFPi(x, a, b):
            return LFPi(x, normalize_kind(a, fuel), normalize_kind(b, fuel))
    raise TypeError(type(k).__name__)


def normalize_deep(k: LFObject, fuel: int = 64) -> LFObject:
    """normalize_beta_eta, then the same inside every lambda annotation."""
    def ann(t):
        match t:
            case LFLam(x, a, body):
                return LFLam(x, normalize_kind_deep(a), ann(body))
            case LFApp(g, b):
                return LFApp(ann(g), ann(b))
        return t

    def normalize_kind_deep(t):
        match t:
            case LFEl(c):
                return LFEl(normalize_deep(c, fuel))
            case LFPi(x, a, b):
                return LFPi(x, normalize_kind_deep(a), normalize_kind_deep(b))
        return t

    return ann(normalize_beta_eta(k, fuel))


def is_normal(k: LFObject) -> bool:
    return not beta_eta_step(k)


# ---------------------------------------------------------------------------
# computation rules


@dataclasses.dataclass(frozen=True)
class LFRule:
    """An oriented equation.  Its variables are renamed apart from anything
    the parser can produce, so they never meet the names of a matched term."""

    decl: LFEqDecl
    context: LFContext
    left: LFObject  # beta-normal, eta-long
    right: LFObject
    ok: bool
    reason: str = ""


def _metas_in_spine(p: LFObject, metas: set[str], bound: list[str], seen: set[str]) -> str | None:
    head, args = spine(p)
    match head:
        case LFLam(x, _, body):
            if args:
                return "left side is not beta-normal"
            return _metas_in_spine(body, metas, bound + [x], seen)
        case LFVar(n) if n in metas and n not in bound:
            names = []
            for a in args:
                if not (isinstance(a, LFVar) and a.name in bound) or a.name in names:
                    return f"{n} is applied to something other than distinct bound variables"
                names.append(a.name)
            seen.add(n)
            return None
    for a in args:
        why = _metas_in_spine(a, metas, bound, seen)
        if why:
            return why
    return None


def make_rule(decl: LFEqDecl, spec: LFSpecification, fuel: int = 64) -> LFRule:
    ren: dict[str, LFObject] = {}
    entries = []
    for n, k in decl.context.entries:
        entries.append((n + "?", lf_subst(k, ren)))
        ren[n] = LFVar(n + "?")
    kind = lf_subst(decl.kind, ren)
    left, right = lf_subst(decl.left, ren), lf_subst(decl.right, ren)
    # an equation at a product kind is read applied to fresh rule variables
    while isinstance(kind, LFPi):
        m = fresh(kind.binder, {n for n, _ in entries}) + "?"
        entries.append((m, kind.domain))
        left, right = LFApp(left, LFVar(m)), LFApp(right, LFVar(m))
        kind = lf_substitute(kind.codomain, kind.binder, LFVar(m))
    ctx = LFContext(tuple(entries))
    try:
        left = long_normal(spec, ctx, left, kind, fuel)
        right = long_normal(spec, ctx, right, kind, fuel)
    except LFError as e:
        return LFRule(decl, ctx, decl.left, decl.right, False, str(e))

    def bad(why):
        return LFRule(decl, ctx, left, right, False, why)

    metas = ctx.names
    head, _ = spine(left)
    if isinstance(head, LFVar) and head.name in metas:
        return bad("left side is headed by a rule variable")
    if isinstance(head, LFLam):
        return bad("left side is an abstraction")
    seen: set[str] = set()
    why = _metas_in_spine(left, metas, [], seen)
    if why:
        return bad(why.replace("?", ""))
    missing = sorted(m[:-1] for m in metas - seen)
    if missing:
        return bad(f"rule variables {', '.join(missing)} do not occur on the left")
    return LFRule(decl, ctx, left, right, True)


def _telescope(k: LFKind, n: int) -> list[tuple[str, LFKind]] | None:
    out = []
    for _ in range(n):
        if not isinstance(k, LFPi):
            return None
        out.append((k.binder, k.domain))
        k = k.codomain
    return out


def _match(rule: LFRule, p, t, bound: list[tuple[str, str]], sigma: dict) -> bool:
    """Pattern p (rule side) against t; bound pairs (pattern name, term name)
    for the binders passed on the way down.  Annotations are not compared."""
    metas = rule.context.names
    pb = [a for a, _ in bound]
    ph, pargs = spine(p)
    flexible = isinstance(ph, LFVar) and ph.name in metas and ph.name not in pb
    if isinstance(p, LFLam):
        if isinstance(t, LFLam):
            return _match(rule, p.body, t.body, bound + [(p.binder, t.binder)], sigma)
        # match modulo eta: read t as [z] t z
        z = fresh("z", lf_names(t) | {y for _, y in bound})
        return _match(rule, p.body, LFApp(t, LFVar(z)), bound + [(p.binder, z)], sigma)
    if isinstance(t, LFLam) and not flexible:
        z = fresh("z?", lf_names(p) | set(pb))
        return _match(rule, LFApp(p, LFVar(z)), t.body, bound + [(z, t.binder)], sigma)
    if flexible:
        # a rule variable applied to distinct bound variables
        tnames = [dict(bound)[a.name] for a in pargs]
        tb = {b for _, b in bound}
        if (lf_free_vars(t) & tb) - set(tnames):
            return False
        kind = rule.context.lookup(ph.name)
        tel = _telescope(kind, len(pargs))
        if tel is None:
            return False
        taken = lf_names(t) | set(tnames)
        zs, ren = [], {}
        for (z, _), y in zip(tel, tnames):
            z2 = fresh(z, taken)
            taken.add(z2)
            zs.append(z2)
            ren[y] = LFVar(z2)
        body = lf_subst(t, ren)
        sol_tel = []
        prev = {}
        for (z, dom), z2 in zip(tel, zs):
            sol_tel.append((z2, lf_subst(dom, prev)))
            prev[z] = LFVar(z2)
        sol = body
        for z2, dom in reversed(sol_tel):
            sol = LFLam(z2, dom, sol)
        if ph.name in sigma:
            return lf_alpha_eq(sigma[ph.name], sol, annotations=False)
        sigma[ph.name] = sol
        return True
    th, targs = spine(t)
    if len(pargs) != len(targs):
        return False
    match ph, th:
        case LFConst(a), LFConst(b) if a == b:
            pass
        case LFVar(a), LFVar(b) if a in pb or b in {y for _, y in bound}:
            if (a, b) not in _innermost_pairs(bound, a, b):
                return False
        case LFVar(a), LFVar(b) if a == b:
            pass
        case _:
            return False
    return all(_match(rule, pa, ta, bound, sigma) for pa, ta in zip(pargs, targs))


def _innermost_pairs(bound, a, b):
    for x, y in reversed(bound):
        if x == a or y == b:
            return {(x, y)}
    return set()


def match_rule(rule: LFRule, t: LFObject) -> dict[str, LFObject] | None:
    if not rule.ok:
        return None
    sigma: dict[str, LFObject] = {}
    if not _match(rule, rule.left, t, [], sigma):
        return None
    return sigma


def instantiate_rule(rule: LFRule, sigma: dict[str, LFObject], side: LFObject | None = None) -> LFObject:
    # the solutions' annotations mention earlier rule variables
    done: dict[str, LFObject] = {}
    for n, _ in rule.context.entries:
        done[n] = lf_subst(sigma[n], done)
    return lf_subst(rule.right if side is None else side, done)


def rules_of(spec: LFSpecification, fuel: int = 64) -> list[LFRule]:
    return [make_rule(d, spec, fuel) for d in spec.equations]


def r_steps(rules: list[LFRule], k: LFObject) -> list[tuple[LFObject, str, Position]]:
    out = []
    for pos in positions(k):
        sub = subterm_at(k, pos)
        for r in rules:
            sigma = match_rule(r, sub)
            if sigma is not None:
                out.append((replace_at(k, pos, instantiate_rule(r, sigma)), r.decl.ident, pos))
    return out


# ---------------------------------------------------------------------------
# conversion


class Converter:
    """Object convertibility at a kind: bring both sides to beta-normal
    eta-long form, then join them by rewriting with the computation rules,
    breadth first, under a budget of rewrite steps.

    Sides are compared ignoring lambda annotations.  Both sides are checked
    to have the kind before this is asked, which fixes their annotations up
    to kind equality."""

    def __init__(self, spec: LFSpecification, fuel: int = 64):
        self.spec = spec
        self.fuel = fuel
        self.rules = [r for r in rules_of(spec, fuel) if r.ok]

    def key(self, k):
        return lf_canon(k, annotations=False)

    def normal(self, ctx: LFContext, k: LFObject, kind: LFKind) -> LFObject:
        return long_normal(self.spec, ctx, k, kind, self.fuel)

    def successors(self, ctx: LFContext, k: LFObject, kind: LFKind) -> list[LFObject]:
        return [self.normal(ctx, k2, kind) for k2, _, _ in r_steps(self.rules, k)]

    def convertible(self, ctx: LFContext, a: LFObject, b: LFObject, kind: LFKind) -> bool | None:
        """True, False when both sides' rewriting closures are finite and
        disjoint, None when the budget ran out."""
        a = self.normal(ctx, a, kind)
        b = self.normal(ctx, b, kind)
        if self.key(a) == self.key(b):
            return True
        seen = [{self.key(a)}, {self.key(b)}]
        frontier = [deque([a]), deque([b])]
        budget = self.fuel
        while frontier[0] or frontier[1]:
            for side in (0, 1):
                if not frontier[side]:
                    continue
                if budget <= 0:
                    return None
                budget -= 1
                k = frontier[side].popleft()
                for k2 in self.successors(ctx, k, kind):
                    key = self.key(k2)
                    if key in seen[1 - side]:
                        return True
                    if key not in seen[side]:
                        seen[side].add(key)
                        frontier[side].append(k2)
        return False


# ---------------------------------------------------------------------------
# checking


@dataclasses.dataclass(frozen=True)
class LFResult:
    ok: bool
    reason: str = ""
    unknown: bool = False


class LFChecker:
    def __init__(self, spec: LFSpecification, fuel: int = 64):
        self.spec = spec
        self.fuel = fuel
        self.conv = Converter(spec, fuel)

    # contexts and kinds

    def valid(self, ctx: LFContext) -> None:
        seen = set()
        for i, (x, k) in enumerate(ctx.entries):
            if x in seen:
                raise LFError(f"context repeats {x}")
            seen.add(x)
            self.kind_wf(ctx.prefix(i), k)

    def kind_wf(self, ctx: LFContext, k: LFKind) -> None:
        match k:
            case LFType():
                return
            case LFEl(c):
                self.check(ctx, c, LTYPE)
            case LFPi(x, a, b):
                self.kind_wf(ctx, a)
                x2, b2 = self._away(ctx, x, b)
                self.kind_wf(ctx.extend(x2, a), b2)

    def _away(self, ctx: LFContext, x: str, body):
        """Rename a binder that clashes with a context name."""
        if x not in ctx.names:
            return x, body
        x2 = fresh(x, ctx.names | lf_names(body))
        return x2, lf_substitute(body, x, LFVar(x2))

    # objects

    def infer(self, ctx: LFContext, k: LFObject) -> LFKind:
        match k:
            case LFVar(n):
                t = ctx.lookup(n)
                if t is None:
                    raise LFError(f"unknown variable {n}")
                return t
            case LFConst(n):
                t = self.spec.constant_kind(n)
                if t is None:
                    raise LFError(f"unknown constant {n}")
                return t
            case LFLam(x, a, body):
                self.kind_wf(ctx, a)
                x2, body2 = self._away(ctx, x, body)
                return LFPi(x2, a, self.infer(ctx.extend(x2, a), body2))
            case LFApp(f, arg):
                tf = self.infer(ctx, f)
                if not isinstance(tf, LFPi):
                    raise LFError(f"{f} has kind {tf}, which is not a product")
                self.check(ctx, arg, tf.domain)
                return lf_substitute(tf.codomain, tf.binder, arg)
        raise TypeError(type(k).__name__)

    def check(self, ctx: LFContext, k: LFObject, want: LFKind) -> None:
        got = self.infer(ctx, k)
        if not self.kind_eq(ctx, got, want):
            raise LFError(f"{k} has kind {got}, not {want}")

    def kind_eq(self, ctx: LFContext, a: LFKind, b: LFKind) -> bool:
        match a, b:
            case LFType(), LFType():
                return True
            case LFEl(x), LFEl(y):
                r = self.conv.convertible(ctx, x, y, LTYPE)
                if r is None:
                    raise FuelExhausted(f"could not decide {x} = {y} within fuel {self.fuel}")
                return r
            case LFPi(x, a1, b1), LFPi(y, a2, b2):
                if not self.kind_eq(ctx, a1, a2):
                    return False
                z = x if x not in ctx.names else fresh(x, ctx.names | lf_names(b1) | lf_names(b2))
                return self.kind_eq(ctx.extend(z, a1), lf_substitute(b1, x, LFVar(z)),
                                    lf_substitute(b2, y, LFVar(z)))
        return False

    def obj_eq(self, ctx: LFContext, a: LFObject, b: LFObject, k: LFKind) -> None:
        self.check(ctx, a, k)
        self.check(ctx, b, k)
        r = self.conv.convertible(ctx, a, b, k)
        if r is None:
            raise FuelExhausted(f"could not decide {a} = {b} within fuel {self.fuel}")
        if not r:
            raise LFError(f"{a} and {b} are not convertible")

    def judgement(self, j: LFJudgement) -> None:
        self.valid(j.context)
        ctx = j.context
        match j.body:
            case LFValid():
                return
            case LFKindWf(k):
                self.kind_wf(ctx, k)
            case LFTyping(k, t):
                self.kind_wf(ctx, t)
                self.check(ctx, k, t)
            case LFObjEq(a, b, t):
                self.kind_wf(ctx, t)
                self.obj_eq(ctx, a, b, t)
            case LFKindEq(a, b):
                self.kind_wf(ctx, a)
                self.kind_wf(ctx, b)
                if not self.kind_eq(ctx, a, b):
                    raise LFError(f"kinds {a} and {b} are not equal")

    def specification(self) -> None:
        for d in self.spec.declarations:
            match d:
                case LFConstDecl(n, k):
                    self.kind_wf(LEMPTY, k)
                case LFEqDecl(ident, ctx, a, b, t):
                    self.valid(ctx)
                    self.kind_wf(ctx, t)
                    self.check(ctx, a, t)
                    self.check(ctx, b, t)


def check_LF(spec: LFSpecification, j: LFJudgement, fuel: int = 64) -> LFResult:
    try:
        LFChecker(spec, fuel).judgement(j)
    except FuelExhausted as e:
        return LFResult(False, str(e), unknown=True)
    except LFError as e:
        return LFResult(False, str(e))
    return LFResult(True)


def infer_LF(spec: LFSpecification, ctx: LFContext, k: LFObject, fuel: int = 64) -> LFKind:
    return LFChecker(spec, fuel).infer(ctx, k)


# ---------------------------------------------------------------------------
# arities


def ar_kind(k: LFKind) -> Arity:
    match k:
        case LFType() | LFEl():
            return BASE
        case LFPi(_, a, b):
            return Arity((ar_kind(a),) + ar_kind(b).children)
    raise TypeError(type(k).__name__)


def ar_obj(ctx: LFContext, spec: LFSpecification, k: LFObject) -> Arity | None:
    match k:
        case LFVar(n):
            t = ctx.lookup(n)
            return None if t is None else ar_kind(t)
        case LFConst(n):
            t = spec.constant_kind(n)
            return None if t is None else ar_kind(t)
        case LFLam(x, a, body):
            inner = ar_obj(ctx.extend(x, a), spec, body)
            return None if inner is None else Arity((ar_kind(a),) + inner.children)
        case LFApp(f, arg):
            af, aa = ar_obj(ctx, spec, f), ar_obj(ctx, spec, arg)
            if af is None or aa is None or not af.children or af.children[0] != aa:
                return None
            return Arity(af.children[1:])
    raise TypeError(type(k).__name__)


# ---------------------------------------------------------------------------
# NF: LF to TF


class NotWellAritied(LFError):
    pass


def _nf_obj(ctx: LFContext, spec: LFSpecification, k: LFObject) -> Abstraction:
    match k:
        case LFVar(n):
            t = ctx.lookup(n)
            if t is None:
                raise NotWellAritied(f"variable {n} is not in the context")
            return eta_long(var(n, ar_kind(t)))
        case LFConst(n):
            t = spec.constant_kind(n)
            if t is None:
                raise NotWellAritied(f"constant {n} is not declared")
            return eta_long(const(n, ar_kind(t)))
        case LFLam(x, a, body):
            inner = _nf_obj(ctx.extend(x, a), spec, body)
            if any(b.name == x for b in inner.binders):
                inner = rebind_away(inner, {x})
            return Abstraction((var(x, ar_kind(a)),) + inner.binders, inner.body)
        case LFApp(f, arg):
            nf, na = _nf_obj(ctx, spec, f), _nf_obj(ctx, spec, arg)
            try:
                return employ(nf, na)
            except ArityError as e:
                raise NotWellAritied(f"{k} is not well-aritied: {e}") from None
    raise TypeError(type(k).__name__)


def _nf_kind(ctx: LFContext, spec: LFSpecification, k: LFKind) -> ProductKind:
    match k:
        case LFType():
            return ProductKind(EMPTY, TYPE)
        case LFEl(c):
            f = _nf_obj(ctx, spec, c)
            if f.binders:
                raise NotWellAritied(f"El applied to {c}, which is not of base arity")
            return ProductKind(EMPTY, BaseKind(f.body))
        case LFPi(x, a, b):
            head = _nf_kind(ctx, spec, a)
            rest = _nf_kind(ctx.extend(x, a), spec, b)
            if x in rest.telescope.names:
                rest = rebind_away(rest, {x})
            return ProductKind(Context(((var(x, ar_kind(a)), head),) + rest.telescope.entries), rest.target)
    raise TypeError(type(k).__name__)


def _nf_context(ctx: LFContext, spec: LFSpecification, delta: LFContext) -> Context:
    out = []
    inner = ctx
    for x, k in delta.entries:
        out.append((var(x, ar_kind(k)), _nf_kind(inner, spec, k)))
        inner = inner.extend(x, k)
    try:
        return Context(tuple(out))
    except ArityError as e:
        raise NotWellAritied(str(e)) from None


def _nf_judgement(spec: LFSpecification, j: LFJudgement):
    g = j.context
    tg = _nf_context(LEMPTY, spec, g)
    match j.body:
        case LFValid():
            return Judgement(tg, VALID)
        case LFKindWf(k):
            return DefinedJudgement(tg, KindWf(_nf_kind(g, spec, k)))
        case LFKindEq(a, b):
            return DefinedJudgement(tg, KindEq(_nf_kind(g, spec, a), _nf_kind(g, spec, b)))
        case LFTyping(k, t):
            tk, tt = _nf_obj(g, spec, k), _nf_kind(g, spec, t)
            if tt.is_base and not tk.binders:
                return Judgement(tg, Typing(tk.body, tt.target))
            return DefinedJudgement(tg, AbsTyping(tk, tt))
        case LFObjEq(a, b, t):
            ta, tb, tt = _nf_obj(g, spec, a), _nf_obj(g, spec, b), _nf_kind(g, spec, t)
            if tt.is_base and not ta.binders and not tb.binders:
                return Judgement(tg, Equality(ta.body, tb.body, tt.target))
            return DefinedJudgement(tg, AbsEq(ta, tb, tt))
    raise TypeError(type(j.body).__name__)


def _nf_spec(spec: LFSpecification) -> Specification:
    decls = []
    for d in spec.declarations:
        match d:
            case LFConstDecl(n, k):
                decls.append(ConstDecl(const(n, ar_kind(k)), _nf_kind(LEMPTY, spec, k)))
            case LFEqDecl(ident, ctx, a, b, t):
                tt = _nf_kind(ctx, spec, t)
                if not tt.is_base:
                    raise NotWellAritied(f"{ident}: equation at a kind that is not a base kind")
                ta, tb = _nf_obj(ctx, spec, a), _nf_obj(ctx, spec, b)
                if ta.binders or tb.binders:
                    raise NotWellAritied(f"{ident}: equation sides are not of base arity")
                decls.append(EqDecl(ident, _nf_context(LEMPTY, spec, ctx), ta.body, tb.body, tt.target))
    return Specification(tuple(decls))


def nf_entity(ctx: LFContext, spec: LFSpecification, x):
    """NF_ctx(x): objects give abstractions, kinds give product kinds,
    contexts, judgements and specifications map pointwise."""
    match x:
        case LFVar() | LFConst() | LFLam() | LFApp():
            return _nf_obj(ctx, spec, x)
        case LFType() | LFEl() | LFPi():
            return _nf_kind(ctx, spec, x)
        case LFContext():
            return _nf_context(ctx, spec, x)
        case LFJudgement():
            return _nf_judgement(spec, x)
        case LFSpecification():
            return _nf_spec(x)
    raise TypeError(f"NF of {type(x).__name__}")


def nf_object(ctx: LFContext, spec: LFSpecification, k: LFObject) -> Object:
    """NF of an object of base arity, as a TF object."""
    f = _nf_obj(ctx, spec, k)
    if f.binders:
        raise NotWellAritied(f"{k} does not have base arity")
    return f.body


# ---------------------------------------------------------------------------
# lift: TF_k to LF


def lift(x):
    match x:
        case Object(head, args):
            h = LFVar(head.name) if head.is_var else LFConst(head.name)
            return apply_all(h, [lift(a) for a in args])
        case Abstraction(binders, body, labels):
            if binders and labels is None:
                raise LFError(f"cannot lift an abstraction without binder labels: {x}")
            out = lift(body)
            for b, k in reversed(list(zip(binders, labels or ()))):
                out = LFLam(b.name, lift(k), out)
            return out
        case BaseKind():
            return LTYPE if x.is_type else LFEl(lift(x.carrier))
        case ProductKind(tel, target):
            out = lift(target)
            for s, k in reversed(tel.entries):
                out = LFPi(s.name, lift(k), out)
            return out
        case Context(entries):
            return LFContext(tuple((s.name, lift(k)) for s, k in entries))
        case Judgement(ctx, body):
            match body:
                case Valid():
                    return LFJudgement(lift(ctx), LFValid())
                case Typing(m, t):
                    return LFJudgement(lift(ctx), LFTyping(lift(m), lift(t)))
                case Equality(m, n, t):
                    return LFJudgement(lift(ctx), LFObjEq(lift(m), lift(n), lift(t)))
        case ConstDecl(sym, k):
            return LFConstDecl(sym.name, lift(k))
        case EqDecl(ident, ctx, m, n, t):
            return LFEqDecl(ident, lift(ctx), lift(m), lift(n), lift(t))
        case Specification(decls, _):
            return LFSpecification(tuple(lift(d) for d in decls))
    raise TypeError(f"lift of {type(x).__name__}")


# ---------------------------------------------------------------------------
# the simply typed image


@dataclasses.dataclass(frozen=True)
class SBase:
    def __str__(self):
        return "*"


@dataclasses.dataclass(frozen=True)
class SArrow:
    dom: "STLCType"
    cod: "STLCType"

    def __str__(self):
        d = f"({self.dom})" if isinstance(self.dom, SArrow) else str(self.dom)
        return f"{d} -> {self.cod}"


STLCType = typing.Union[SBase, SArrow]
STAR = SBase()


@dataclasses.dataclass(frozen=True)
class SVar:
    name: str

    def __str__(self):
        return self.name


@dataclasses.dataclass(frozen=True)
class SLam:
    binder: str
    type: STLCType
    body: "STLCTerm"

    def __str__(self):
        return f"(\\{self.binder}:{self.type}. {self.body})"


@dataclasses.dataclass(frozen=True)
class SApp:
    fun: "STLCTerm"
    arg: "STLCTerm"

    def __str__(self):
        return f"({self.fun} {self.arg})"


STLCTerm = typing.Union[SVar, SLam, SApp]


class STLCError(ValueError):
    pass


def boxes(x):
    match x:
        case LFType() | LFEl():
            return STAR
        case LFPi(_, a, b):
            return SArrow(boxes(a), boxes(b))
        case LFVar(n) | LFConst(n):
            return SVar(n)
        case LFLam(b, a, body):
            return SLam(b, boxes(a), boxes(body))
        case LFApp(f, a):
            return SApp(boxes(f), boxes(a))
        case LFContext(entries):
            return tuple((n, boxes(k)) for n, k in entries)
    raise TypeError(f"boxes of {type(x).__name__}")


def boxes_constants(spec: LFSpecification, k: LFObject) -> tuple[tuple[str, STLCType], ...]:
    """c1 : [K1], ..., cm : [Km] for the constants occurring in k."""
    out = []
    for c in sorted(_lf_constants(k)):
        t = spec.constant_kind(c)
        if t is not None:
            out.append((c, boxes(t)))
    return tuple(out)


def _lf_constants(x) -> set[str]:
    match x:
        case LFConst(n):
            return {n}
        case LFVar() | LFType():
            return set()
        case LFLam(_, k, body) | LFPi(_, k, body):
            return _lf_constants(k) | _lf_constants(body)
        case LFApp(f, a):
            return _lf_constants(f) | _lf_constants(a)
        case LFEl(c):
            return _lf_constants(c)
    raise TypeError(type(x).__name__)


def stlc_type_check(ctx, t: STLCTerm) -> STLCType:
    env = dict(ctx)
    match t:
        case SVar(n):
            if n not in env:
                raise STLCError(f"unbound variable {n}")
            return env[n]
        case SLam(x, a, body):
            env[x] = a
            return SArrow(a, stlc_type_check(tuple(env.items()), body))
        case SApp(f, a):
            tf = stlc_type_check(ctx, f)
            ta = stlc_type_check(ctx, a)
            if not isinstance(tf, SArrow) or tf.dom != ta:
                raise STLCError(f"cannot apply {f} : {tf} to {a} : {ta}")
            return tf.cod
    raise TypeError(type(t).__name__)


def _s_fv(t) -> set[str]:
    match t:
        case SVar(n):
            return {n}
        case SLam(x, _, b):
            return _s_fv(b) - {x}
        case SApp(f, a):
            return _s_fv(f) | _s_fv(a)


def _s_names(t) -> set[str]:
    match t:
        case SVar(n):
            return {n}
        case SLam(x, _, b):
            return {x} | _s_names(b)
        case SApp(f, a):
            return _s_names(f) | _s_names(a)


def stlc_subst(t: STLCTerm, x: str, v: STLCTerm) -> STLCTerm:
    match t:
        case SVar(n):
            return v if n == x else t
        case SApp(f, a):
            return SApp(stlc_subst(f, x, v), stlc_subst(a, x, v))
        case SLam(y, a, b):
            if y == x or x not in _s_fv(b):
                return t
            if y in _s_fv(v):
                y2 = fresh(y, _s_names(b) | _s_names(v) | {x})
                b = stlc_subst(b, y, SVar(y2))
                y = y2
            return SLam(y, a, stlc_subst(b, x, v))


def stlc_canon(t, env=None, depth=0):
    env = env or {}
    match t:
        case SVar(n):
            return ("b", depth - env[n]) if n in env else ("v", n)
        case SLam(x, a, b):
            inner = dict(env)
            inner[x] = depth + 1
            return ("\\", a, stlc_canon(b, inner, depth + 1))
        case SApp(f, a):
            return ("@", stlc_canon(f, env, depth), stlc_canon(a, env, depth))


def stlc_alpha_eq(a, b) -> bool:
    return stlc_canon(a) == stlc_canon(b)


def stlc_steps(t: STLCTerm) -> list[STLCTerm]:
    """All one-step beta-eta reducts."""
    out = []
    match t:
        case SApp(SLam(x, _, b), a):
            out.append(stlc_subst(b, x, a))
        case SLam(x, _, SApp(f, SVar(y))) if y == x and x not in _s_fv(f):
            out.append(f)
    match t:
        case SApp(f, a):
            out += [SApp(f2, a) for f2 in stlc_steps(f)]
            out += [SApp(f, a2) for a2 in stlc_steps(a)]
        case SLam(x, ty, b):
            out += [SLam(x, ty, b2) for b2 in stlc_steps(b)]
    return out


# ---------------------------------------------------------------------------
# reduction probes


@dataclasses.dataclass(frozen=True)
class TraceStep:
    term: LFObject
    rule: str  # "beta", "eta" or "R:<equation>"
    position: Position
    nf: Abstraction | None = None


@dataclasses.dataclass(frozen=True)
class ReductionTrace:
    start: LFObject
    start_nf: Abstraction
    steps: tuple[TraceStep, ...]
    terminal: str  # "normal" or "fuelExhausted"
    problems: tuple[str, ...] = ()

    @property
    def final(self) -> LFObject:
        return self.steps[-1].term if self.steps else self.start

    @property
    def ok(self) -> bool:
        return self.terminal == "normal" and not self.problems


def _any_step(rules, k: LFObject):
    """The leftmost-outermost redex of R or beta; eta only when there is
    neither, since contracting an eta redex can hide a rule instance."""
    for pos in positions(k):
        sub = subterm_at(k, pos)
        for r in rules:
            sigma = match_rule(r, sub)
            if sigma is not None:
                return replace_at(k, pos, instantiate_rule(r, sigma)), "R:" + r.decl.ident, pos
        for red, rule in _contract(sub):
            if rule == BETA:
                return replace_at(k, pos, red), rule, pos
    for pos in positions(k):
        for red, rule in _contract(subterm_at(k, pos)):
            if rule == ETA:
                return replace_at(k, pos, red), rule, pos
    return None


def sn_probe(spec: LFSpecification, ctx: LFContext, k: LFObject, fuel: int = 256) -> ReductionTrace:
    """Reduce k under R, beta and eta (eta last), leftmost-outermost, recording the NF
    image of every term.  beta and eta steps must leave the image unchanged
    and R steps must change it; deviations are listed in problems."""
    LFChecker(spec, fuel).infer(ctx, k)
    rules = [r for r in rules_of(spec, fuel) if r.ok]
    problems = []
    cur = k
    cur_nf = start_nf = _nf_obj(ctx, spec, k)
    steps = []
    for _ in range(fuel):
        nxt = _any_step(rules, cur)
        if nxt is None:
            return ReductionTrace(k, start_nf, tuple(steps), "normal", tuple(problems))
        term, rule, pos = nxt
        nf = _nf_obj(ctx, spec, term)
        same = alpha_eq(nf, cur_nf)
        if rule in (BETA, ETA) and not same:
            problems.append(f"step {len(steps) + 1} ({rule} at {pos}) changed the NF image")
        if rule.startswith("R:") and same:
            problems.append(f"step {len(steps) + 1} ({rule} at {pos}) left the NF image unchanged")
        steps.append(TraceStep(term, rule, pos, nf))
        cur, cur_nf = term, nf
    if _any_step(rules, cur) is None:
        return ReductionTrace(k, start_nf, tuple(steps), "normal", tuple(problems))
    return ReductionTrace(k, start_nf, tuple(steps), "fuelExhausted", tuple(problems))


def minimize_nonterminating(spec: LFSpecification, ctx: LFContext, k: LFObject, fuel: int = 256) -> LFObject:
    """Shrink a term whose probe runs out of fuel to a smallest typable
    subterm (closed over the context) that still does."""
    best = k
    changed = True
    while changed:
        changed = False
        for pos in list(positions(best))[1:]:
            sub = subterm_at(best, pos)
            if lf_free_vars(sub) - ctx.names:
                continue
            try:
                tr = sn_probe(spec, ctx, sub, fuel)
            except LFError:
                continue
            if tr.terminal == "fuelExhausted":
                best, changed = sub, True
                break
    return best
