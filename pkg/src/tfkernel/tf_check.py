"""Judgements, derivations and specifications for TF (and, with labelled
specifications, TF_k).

Defined judgement forms expand to ordered, duplicate-free lists of primitive
judgements.  A derivation node whose rule has a defined premise stores one
sub-derivation per member of that expansion, in order.
"""

from __future__ import annotations

import dataclasses
import functools
import typing
from collections import deque

from tfkernel.arity import order_of
from tfkernel.tf_core import (
    EMPTY,
    TYPE,
    Abstraction,
    ArityError,
    BaseKind,
    Context,
    Object,
    ProductKind,
    Symbol,
    alpha_eq,
    canon,
    canon_under,
    erase,
    eta_long,
    free_vars,
    instantiate_seq,
    kind,
    rebind_away,
    rebind_to,
)

RULES = ("emp_ctxt", "ctxt", "var", "var_eq", "ref", "sym", "trans", "conv", "conv_eq", "const", "const_eq", "eq")

DEFAULT_FUEL = 64


class CheckFailure(Exception):
    """A judgement could not be established."""


# ---------------------------------------------------------------------------
# judgements


@dataclasses.dataclass(frozen=True)
class Valid:
    pass


@dataclasses.dataclass(frozen=True)
class Typing:
    term: Object
    kind: BaseKind


@dataclasses.dataclass(frozen=True)
class Equality:
    left: Object
    right: Object
    kind: BaseKind


VALID = Valid()


@dataclasses.dataclass(frozen=True)
class Judgement:
    context: Context
    body: Valid | Typing | Equality

    def key(self) -> tuple:
        match self.body:
            case Valid():
                return ("valid", canon(self.context))
            case Typing(m, t):
                return ("typing", canon_under(self.context, m, t))
            case Equality(m, n, t):
                return ("equality", canon_under(self.context, m, n, t))

    def __str__(self) -> str:
        ctx = str(self.context) or "<>"
        match self.body:
            case Valid():
                return f"{ctx} valid"
            case Typing(m, t):
                return f"{ctx} |- {m} : {t}"
            case Equality(m, n, t):
                return f"{ctx} |- {m} = {n} : {t}"


def same_judgement(a: Judgement, b: Judgement) -> bool:
    return a is b or a.key() == b.key()


# defined judgement bodies


@dataclasses.dataclass(frozen=True)
class KindWf:
    kind: ProductKind


@dataclasses.dataclass(frozen=True)
class KindEq:
    left: ProductKind
    right: ProductKind


@dataclasses.dataclass(frozen=True)
class AbsTyping:
    abstraction: Abstraction
    kind: ProductKind


@dataclasses.dataclass(frozen=True)
class AbsEq:
    left: Abstraction
    right: Abstraction
    kind: ProductKind


@dataclasses.dataclass(frozen=True)
class SeqSat:
    items: tuple[Abstraction, ...]
    context: Context


@dataclasses.dataclass(frozen=True)
class SeqEq:
    left: tuple[Abstraction, ...]
    right: tuple[Abstraction, ...]
    context: Context


@dataclasses.dataclass(frozen=True)
class CtxEq:
    left: Context
    right: Context


DefinedBody = typing.Union[KindWf, KindEq, AbsTyping, AbsEq, SeqSat, SeqEq, CtxEq]


@dataclasses.dataclass(frozen=True)
class DefinedJudgement:
    context: Context
    body: DefinedBody


class Undefined(Exception):
    """The defined judgement has no expansion (incomparable kind shapes)."""


def expand_defined(dj: DefinedJudgement, labelled: bool = False) -> list[Judgement] | None:
    """The set of primitive judgements a defined judgement stands for, as an
    ordered list without repeats, or None when the judgement is undefined."""
    try:
        members = _expand(dj.context, dj.body, labelled)
    except Undefined:
        return None
    out, seen = [], set()
    for j in members:
        k = j.key()
        if k not in seen:
            seen.add(k)
            out.append(j)
    return out


def _fv_names(*xs) -> set[str]:
    out: set[str] = set()
    for x in xs:
        out |= {s.name for s in free_vars(x)}
    return out


def _expand(g: Context, body: DefinedBody, labelled: bool) -> list[Judgement]:
    match body:
        case KindWf(k):
            k2 = rebind_away(k, g.names)
            inner = g + k2.telescope
            if k2.target.is_type:
                return [Judgement(inner, VALID)]
            return [Judgement(inner, Typing(k2.target.carrier, TYPE))]
        case KindEq(k1, k2):
            return _kind_eq(g, k1, k2, labelled)
        case CtxEq(d1, d2):
            return _ctx_eq(g, d1, d2, labelled)
        case AbsTyping(f, k):
            _same_arity(f.arity, k.arity)
            k2 = rebind_away(k, g.names | _fv_names(f))
            f2 = rebind_to(f, k2.telescope.dom)
            out = []
            if labelled:
                out += _ctx_eq(g, k2.telescope, _binder_context(f2), labelled)
            out.append(Judgement(g + k2.telescope, Typing(f2.body, k2.target)))
            return out
        case AbsEq(f1, f2, k):
            _same_arity(f1.arity, k.arity)
            _same_arity(f2.arity, k.arity)
            k2 = rebind_away(k, g.names | _fv_names(f1, f2))
            a = rebind_to(f1, k2.telescope.dom)
            b = rebind_to(f2, k2.telescope.dom)
            out = []
            if labelled:
                out += _ctx_eq(g, k2.telescope, _binder_context(a), labelled)
                out += _ctx_eq(g, k2.telescope, _binder_context(b), labelled)
            out.append(Judgement(g + k2.telescope, Equality(a.body, b.body, k2.target)))
            return out
        case SeqSat(fs, d):
            if len(fs) != len(d):
                raise Undefined()
            out = [Judgement(g, VALID)]
            for i, (x, k) in enumerate(d.entries):
                ki = instantiate_seq(fs[:i], d.dom[:i], k)
                out += _expand(g, AbsTyping(fs[i], ki), labelled)
            return out
        case SeqEq(fs, gs, d):
            if len(fs) != len(d) or len(gs) != len(d):
                raise Undefined()
            out = [Judgement(g, VALID)]
            for i, (x, k) in enumerate(d.entries):
                ki = instantiate_seq(fs[:i], d.dom[:i], k)
                out += _expand(g, AbsEq(fs[i], gs[i], ki), labelled)
            return out
    raise TypeError(f"not a defined judgement: {body!r}")


def _same_arity(a, b) -> None:
    if a != b:
        raise Undefined()


def _binder_context(f: Abstraction) -> Context:
    if not f.binders:
        return EMPTY
    if f.labels is None:
        raise CheckFailure(f"abstraction {f} lacks the kind labels TF_k requires")
    return f.context()


def _base_eq(g: Context, t1: BaseKind, t2: BaseKind) -> list[Judgement]:
    if t1.is_type and t2.is_type:
        return [Judgement(g, VALID)]
    if not t1.is_type and not t2.is_type:
        return [Judgement(g, Equality(t1.carrier, t2.carrier, TYPE))]
    raise Undefined()


def _kind_eq(g: Context, k1: ProductKind, k2: ProductKind, labelled: bool) -> list[Judgement]:
    if k1.arity != k2.arity:
        raise Undefined()
    if k1.is_base and k2.is_base:
        return _base_eq(g, k1.target, k2.target)
    a = rebind_away(k1, g.names | _fv_names(k2))
    b = rebind_to(k2, a.telescope.dom)
    return _ctx_eq(g, a.telescope, b.telescope, labelled) + _base_eq(g + a.telescope, a.target, b.target)


def _ctx_eq(g: Context, d1: Context, d2: Context, labelled: bool) -> list[Judgement]:
    if d1.arity != d2.arity:
        raise Undefined()
    a = rebind_away(d1, g.names | _fv_names(d2))
    b = rebind_to(ProductKind(d2, TYPE), a.dom).telescope
    out = [Judgement(g, VALID)]
    for i, ((x, ka), (_, kb)) in enumerate(zip(a.entries, b.entries)):
        out += _kind_eq(g + a.prefix(i), ka, kb, labelled)
    return out


# ---------------------------------------------------------------------------
# specifications


@dataclasses.dataclass(frozen=True)
class ConstDecl:
    symbol: Symbol
    kind: ProductKind

    def __post_init__(self):
        if self.symbol.is_var:
            raise ArityError(f"{self.symbol.name} is declared as a constant but is a variable")
        if self.symbol.arity != self.kind.arity:
            raise ArityError(f"constant {self.symbol.name} has arity {self.symbol.arity}, kind has {self.kind.arity}")

    @property
    def ident(self) -> str:
        return self.symbol.name


@dataclasses.dataclass(frozen=True)
class EqDecl:
    ident: str
    context: Context
    left: Object
    right: Object
    kind: BaseKind


Declaration = typing.Union[ConstDecl, EqDecl]


def decl_order(d: Declaration) -> int:
    match d:
        case ConstDecl(_, k):
            return order_of(k.arity)
        case EqDecl(_, ctx, _, _, _):
            return order_of(ctx.arity)


GOOD, TWO_GOOD, UNKNOWN = "good", "twoGood", "unknown"


@dataclasses.dataclass(frozen=True)
class GoodnessClass:
    tag: str
    reason: str

    def display(self) -> str:
        label = {GOOD: "good", TWO_GOOD: "2-good", UNKNOWN: "unknown"}[self.tag]
        return f"{label} ({self.reason})"


@dataclasses.dataclass(frozen=True)
class SpecMetadata:
    order: int
    orderable_witness: tuple[str, ...] | None
    goodness: GoodnessClass


@dataclasses.dataclass(frozen=True)
class Specification:
    declarations: tuple[Declaration, ...] = ()
    labelled: bool = False

    def __post_init__(self):
        seen = set()
        for d in self.declarations:
            if d.ident in seen:
                raise ArityError(f"{d.ident} is declared twice")
            seen.add(d.ident)

    @functools.cached_property
    def _consts(self) -> dict[str, ConstDecl]:
        return {d.symbol.name: d for d in self.declarations if isinstance(d, ConstDecl)}

    @functools.cached_property
    def _eqs(self) -> dict[str, EqDecl]:
        return {d.ident: d for d in self.declarations if isinstance(d, EqDecl)}

    def constant(self, name: str) -> ConstDecl | None:
        return self._consts.get(name)

    def constant_kind(self, c: Symbol) -> ProductKind | None:
        d = self._consts.get(c.name)
        if d is None or d.symbol != c:
            return None
        return d.kind

    def equation(self, ident: str) -> EqDecl | None:
        return self._eqs.get(ident)

    @property
    def equations(self) -> list[EqDecl]:
        return list(self._eqs.values())

    @property
    def constants(self) -> list[ConstDecl]:
        return list(self._consts.values())

    def restrict(self, idents: typing.Iterable[str]) -> Specification:
        keep = set(idents)
        return Specification(tuple(d for d in self.declarations if d.ident in keep), self.labelled)

    def without_equations(self) -> Specification:
        return Specification(tuple(d for d in self.declarations if isinstance(d, ConstDecl)), self.labelled)

    def plus(self, *decls: Declaration) -> Specification:
        return Specification(self.declarations + tuple(decls), self.labelled)

    @functools.cached_property
    def metadata(self) -> SpecMetadata:
        witness = orderable(self)
        return SpecMetadata(spec_order(self), witness.order if witness.ok else None, classify_goodness(self))


def spec_order(spec: Specification) -> int:
    return max((decl_order(d) for d in spec.declarations), default=0)


# ---------------------------------------------------------------------------
# derivations


@dataclasses.dataclass(frozen=True)
class InstData:
    """What a (var)/(const)/(eq) node instantiated: the symbol or equation
    used and the abstraction sequence substituted for its context."""

    ident: str
    args: tuple[Abstraction, ...] = ()


@dataclasses.dataclass(frozen=True, eq=False)
class Derivation:
    rule: str
    conclusion: Judgement
    premises: tuple[Derivation, ...] = ()
    data: InstData | None = None

    def nodes(self) -> typing.Iterator[Derivation]:
        seen = set()
        stack = [self]
        while stack:
            d = stack.pop()
            if id(d) in seen:
                continue
            seen.add(id(d))
            yield d
            stack.extend(d.premises)

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.premises)


@dataclasses.dataclass
class NodeError:
    rule: str
    path: tuple[int, ...]
    reason: str

    def __str__(self) -> str:
        where = ".".join(map(str, self.path)) or "root"
        return f"({self.rule}) at {where}: {self.reason}"


@dataclasses.dataclass
class CheckReport:
    errors: list[NodeError]

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self) -> bool:
        return self.ok


def check_derivation(spec: Specification, d: Derivation) -> CheckReport:
    checker = _Checker(spec)
    try:
        checker.check(d, ())
    except _Fail as e:
        return CheckReport([e.error])
    return CheckReport([])


class _Fail(Exception):
    def __init__(self, error: NodeError):
        super().__init__(str(error))
        self.error = error


class _Checker:
    def __init__(self, spec: Specification):
        self.spec = spec
        self.done: set[int] = set()

    def fail(self, d: Derivation, path, reason: str):
        raise _Fail(NodeError(d.rule, path, reason))

    def check(self, d: Derivation, path: tuple[int, ...]) -> None:
        if id(d) in self.done:
            return
        if d.rule not in RULES:
            self.fail(d, path, f"unknown rule {d.rule}")
        try:
            getattr(self, "rule_" + d.rule)(d, path)
        except (ArityError, CheckFailure) as e:
            self.fail(d, path, str(e))
        for i, p in enumerate(d.premises):
            self.check(p, path + (i,))
        self.done.add(id(d))

    # helpers

    def members(self, d, path, dj: DefinedJudgement) -> None:
        want = expand_defined(dj, self.spec.labelled)
        if want is None:
            self.fail(d, path, "premise is an undefined judgement")
        if len(want) != len(d.premises):
            self.fail(d, path, f"expected {len(want)} premises for the defined judgement, found {len(d.premises)}")
        for i, (w, p) in enumerate(zip(want, d.premises)):
            if not same_judgement(w, p.conclusion):
                self.fail(d, path, f"premise {i} concludes {p.conclusion}, expected {w}")

    def arity_of(self, d, path, n: int) -> None:
        if len(d.premises) != n:
            self.fail(d, path, f"expected {n} premises, found {len(d.premises)}")

    def same_ctx(self, d, path, p: Derivation) -> None:
        if p.conclusion.context != d.conclusion.context:
            self.fail(d, path, "premise context differs from conclusion context")

    def body(self, d, path, cls, j: Judgement | None = None):
        j = j or d.conclusion
        if not isinstance(j.body, cls):
            self.fail(d, path, f"expected a {cls.__name__.lower()} judgement, found {j}")
        return j.body

    def head_kind(self, d, path, head: Symbol, ctx: Context) -> ProductKind:
        if head.is_var:
            if d.rule not in ("var", "var_eq"):
                self.fail(d, path, f"{head.name} is a variable")
            k = ctx.lookup(head)
            if k is None:
                self.fail(d, path, f"no declaration for {head.name} in the context")
            return k
        if d.rule not in ("const", "const_eq"):
            self.fail(d, path, f"{head.name} is a constant")
        k = self.spec.constant_kind(head)
        if k is None:
            self.fail(d, path, f"no declaration for constant {head.name}")
        return k

    # rules

    def rule_emp_ctxt(self, d, path):
        self.body(d, path, Valid)
        self.arity_of(d, path, 0)
        if d.conclusion.context.entries:
            self.fail(d, path, "conclusion context is not empty")

    def rule_ctxt(self, d, path):
        self.body(d, path, Valid)
        ctx = d.conclusion.context
        if not ctx.entries:
            self.fail(d, path, "conclusion context is empty")
        g = ctx.prefix(len(ctx) - 1)
        x, k = ctx.entries[-1]
        if x.name in g.names:
            self.fail(d, path, f"{x.name} is already in the domain")
        self.members(d, path, DefinedJudgement(g, KindWf(k)))

    def _var_like(self, d, path):
        t = self.body(d, path, Typing)
        ctx = d.conclusion.context
        k = self.head_kind(d, path, t.term.head, ctx)
        self.members(d, path, DefinedJudgement(ctx, SeqSat(t.term.args, k.telescope)))
        want = instantiate_seq(t.term.args, k.telescope.dom, k.target)
        if not alpha_eq(want, t.kind):
            self.fail(d, path, f"kind {t.kind} should be {want}")

    def _var_eq_like(self, d, path):
        e = self.body(d, path, Equality)
        ctx = d.conclusion.context
        if e.left.head != e.right.head:
            self.fail(d, path, "the two sides have different heads")
        k = self.head_kind(d, path, e.left.head, ctx)
        self.members(d, path, DefinedJudgement(ctx, SeqEq(e.left.args, e.right.args, k.telescope)))
        want = instantiate_seq(e.left.args, k.telescope.dom, k.target)
        if not alpha_eq(want, e.kind):
            self.fail(d, path, f"kind {e.kind} should be {want}")

    rule_var = rule_const = _var_like
    rule_var_eq = rule_const_eq = _var_eq_like

    def rule_ref(self, d, path):
        e = self.body(d, path, Equality)
        self.arity_of(d, path, 1)
        p = d.premises[0]
        self.same_ctx(d, path, p)
        t = self.body(d, path, Typing, p.conclusion)
        if not (alpha_eq(e.left, e.right) and alpha_eq(e.left, t.term) and alpha_eq(e.kind, t.kind)):
            self.fail(d, path, "conclusion is not M = M : T for the premise M : T")

    def rule_sym(self, d, path):
        e = self.body(d, path, Equality)
        self.arity_of(d, path, 1)
        p = d.premises[0]
        self.same_ctx(d, path, p)
        q = self.body(d, path, Equality, p.conclusion)
        if not (alpha_eq(e.left, q.right) and alpha_eq(e.right, q.left) and alpha_eq(e.kind, q.kind)):
            self.fail(d, path, "conclusion is not the premise reversed")

    def rule_trans(self, d, path):
        e = self.body(d, path, Equality)
        self.arity_of(d, path, 2)
        p, q = d.premises
        self.same_ctx(d, path, p)
        self.same_ctx(d, path, q)
        a = self.body(d, path, Equality, p.conclusion)
        b = self.body(d, path, Equality, q.conclusion)
        if not alpha_eq(a.right, b.left):
            self.fail(d, path, f"middle objects differ: {a.right} and {b.left}")
        if not (alpha_eq(e.left, a.left) and alpha_eq(e.right, b.right)):
            self.fail(d, path, "conclusion does not join the premises")
        if not (alpha_eq(e.kind, a.kind) and alpha_eq(e.kind, b.kind)):
            self.fail(d, path, "kinds differ")

    def _conv_common(self, d, path, cls):
        self.arity_of(d, path, 2)
        p, q = d.premises
        self.same_ctx(d, path, p)
        self.same_ctx(d, path, q)
        first = self.body(d, path, cls, p.conclusion)
        eq = self.body(d, path, Equality, q.conclusion)
        concl = self.body(d, path, cls)
        if not eq.kind.is_type:
            self.fail(d, path, "second premise is not an equality of types")
        if first.kind.is_type or concl.kind.is_type:
            self.fail(d, path, "conversion needs El kinds")
        if not alpha_eq(first.kind.carrier, eq.left) or not alpha_eq(concl.kind.carrier, eq.right):
            self.fail(d, path, "kinds do not match the type equality")
        return first, concl

    def rule_conv(self, d, path):
        first, concl = self._conv_common(d, path, Typing)
        if not alpha_eq(first.term, concl.term):
            self.fail(d, path, "object changed across conversion")

    def rule_conv_eq(self, d, path):
        first, concl = self._conv_common(d, path, Equality)
        if not (alpha_eq(first.left, concl.left) and alpha_eq(first.right, concl.right)):
            self.fail(d, path, "objects changed across conversion")

    def rule_eq(self, d, path):
        e = self.body(d, path, Equality)
        if d.data is None:
            self.fail(d, path, "missing instantiation data")
        decl = self.spec.equation(d.data.ident)
        if decl is None:
            self.fail(d, path, f"no equation declaration {d.data.ident}")
        fs = d.data.args
        ctx = d.conclusion.context
        self.members(d, path, DefinedJudgement(ctx, SeqSat(fs, decl.context)))
        for got, want in ((e.left, decl.left), (e.right, decl.right), (e.kind, decl.kind)):
            inst = instantiate_seq(fs, decl.context.dom, want)
            if not alpha_eq(got, inst):
                self.fail(d, path, f"{got} is not the instance {inst}")


# ---------------------------------------------------------------------------
# rewriting with oriented equations


Position = tuple[int, ...]


@dataclasses.dataclass(frozen=True)
class Pattern:
    decl: EqDecl
    ok: bool
    reason: str = ""


def pattern_check(decl: EqDecl) -> Pattern:
    """Is the left side in the pattern fragment: every context variable
    occurs, always applied to eta-long forms of distinct bound variables?"""
    metas = set(decl.context.dom)
    seen: set[Symbol] = set()
    if decl.left.head in metas:
        return Pattern(decl, False, "left side is headed by a context variable")

    def walk(m: Object, bound: list[Symbol]) -> str | None:
        if m.head in metas:
            seen.add(m.head)
            used = []
            for a in m.args:
                hit = [y for y in bound if y.arity == a.arity and alpha_eq(a, eta_long(y))]
                if not hit or hit[-1] in used:
                    return f"{m.head.name} is applied to something other than distinct bound variables"
                used.append(hit[-1])
            return None
        for a in m.args:
            r = walk(a.body, bound + list(a.binders))
            if r:
                return r
        return None

    why = walk(decl.left, [])
    if why:
        return Pattern(decl, False, why)
    missing = [x.name for x in decl.context.dom if x not in seen]
    if missing:
        return Pattern(decl, False, f"context variables {', '.join(missing)} do not occur on the left")
    return Pattern(decl, True)


def match_equation(decl: EqDecl, term: Object) -> tuple[Abstraction, ...] | None:
    """Abstractions F with {F/Delta}L alpha-equal to term (labels ignored)."""
    metas = set(decl.context.dom)
    sigma: dict[Symbol, Abstraction] = {}
    if not _match(decl.left, term, metas, {}, [], [], sigma):
        return None
    try:
        return tuple(sigma[x] for x in decl.context.dom)
    except KeyError:
        return None


def _match(p: Object, t: Object, metas, bound: dict, local: list[Symbol], local_labels: list, sigma) -> bool:
    if p.head in metas:
        zs = []
        for a in p.args:
            y = a.body.head  # eta-long form of a bound variable
            z = bound.get(y)
            if z is None:
                return False
            zs.append(z)
        others = set(local) - set(zs)
        if free_vars(t) & others:
            return False
        labs = [local_labels[local.index(z)] for z in zs]
        labels = tuple(labs) if zs and None not in labs else None
        f = Abstraction(tuple(zs), t, labels)
        if f.arity != p.head.arity:
            return False
        old = sigma.get(p.head)
        if old is not None:
            return alpha_eq(erase(old), erase(f))
        sigma[p.head] = f
        return True
    if p.head in bound:
        if t.head != bound[p.head]:
            return False
    elif p.head != t.head or t.head in local:
        return False
    for pa, ta in zip(p.args, t.args):
        if any(v in local for v in ta.binders):
            return False
        b2 = dict(bound)
        b2.update(zip(pa.binders, ta.binders))
        labs = list(ta.labels) if ta.labels is not None else [None] * len(ta.binders)
        if not _match(pa.body, ta.body, metas, b2, local + list(ta.binders), local_labels + labs, sigma):
            return False
    return True


def subterm_at(m: Object, pos: Position) -> Object:
    for i in pos:
        m = m.args[i].body
    return m


def replace_at(m: Object, pos: Position, new: Object) -> Object:
    if not pos:
        return new
    i = pos[0]
    a = m.args[i]
    a2 = Abstraction(a.binders, replace_at(a.body, pos[1:], new), a.labels)
    return Object(m.head, m.args[:i] + (a2,) + m.args[i + 1:])


def positions(m: Object, here: Position = ()) -> typing.Iterator[Position]:
    yield here
    for i, a in enumerate(m.args):
        yield from positions(a.body, here + (i,))


def usable_equations(spec: Specification) -> tuple[list[EqDecl], list[str]]:
    ok, warnings = [], []
    for e in spec.equations:
        p = pattern_check(e)
        if p.ok:
            ok.append(e)
        else:
            warnings.append(f"equation {e.ident} is not used for rewriting: {p.reason}")
    return ok, warnings


def rewrite_step(spec: Specification, ctx: Context | None, m: Object) -> list[tuple[Object, str, Position]]:
    """Every single-position, left-to-right instance of a declared equation."""
    eqs, _ = usable_equations(spec)
    out = []
    for pos in positions(m):
        s = subterm_at(m, pos)
        for e in eqs:
            fs = match_equation(e, s)
            if fs is not None:
                out.append((replace_at(m, pos, instantiate_seq(fs, e.context.dom, e.right)), e.ident, pos))
    return out


# ---------------------------------------------------------------------------
# derivation search


UNKNOWN_EQ = None


class Kernel:
    """Builds derivations bottom-up: validity, Generation-style synthesis,
    checking against a kind, and equality by rewriting joinability."""

    def __init__(self, spec: Specification, fuel: int = DEFAULT_FUEL):
        self.spec = spec
        self.fuel = fuel
        self.labelled = spec.labelled
        self._valid: dict = {}
        self._synth: dict = {}
        self._equal: dict = {}
        self._eqs, self.warnings = usable_equations(spec)
        self.last_reason = ""
        self.exhausted = False  # the last failed equality search hit the fuel limit

    # -- validity and defined judgements

    def valid(self, ctx: Context) -> Derivation:
        d = self._valid.get(ctx)
        if d is not None:
            return d
        if not ctx.entries:
            d = Derivation("emp_ctxt", Judgement(ctx, VALID))
        else:
            g = ctx.prefix(len(ctx) - 1)
            x, k = ctx.entries[-1]
            d = Derivation("ctxt", Judgement(ctx, VALID), self.defined(DefinedJudgement(g, KindWf(k))))
        self._valid[ctx] = d
        return d

    def defined(self, dj: DefinedJudgement) -> tuple[Derivation, ...]:
        members = expand_defined(dj, self.labelled)
        if members is None:
            raise CheckFailure("undefined judgement: the kinds have incomparable shapes")
        return tuple(self.derive(j) for j in members)

    def derive(self, j: Judgement) -> Derivation:
        match j.body:
            case Valid():
                return self.valid(j.context)
            case Typing(m, t):
                return self.check(j.context, m, t)
            case Equality(m, n, t):
                d = self.equal(j.context, m, n, t)
                if d is None:
                    raise CheckFailure(f"could not establish {j}")
                return d

    # -- typing

    def head_kind(self, ctx: Context, head: Symbol) -> ProductKind:
        if head.is_var:
            k = ctx.lookup(head)
            if k is None:
                raise CheckFailure(f"no declaration for variable {head.name}")
            return k
        k = self.spec.constant_kind(head)
        if k is None:
            raise CheckFailure(f"unknown constant {head.name}")
        return k

    def synth(self, ctx: Context, m: Object) -> tuple[BaseKind, Derivation]:
        key = (ctx, m)
        hit = self._synth.get(key)
        if hit is not None:
            return hit
        k = self.head_kind(ctx, m.head)
        prem = self.defined(DefinedJudgement(ctx, SeqSat(m.args, k.telescope)))
        t = instantiate_seq(m.args, k.telescope.dom, k.target)
        rule = "var" if m.head.is_var else "const"
        d = Derivation(rule, Judgement(ctx, Typing(m, t)), prem, InstData(m.head.name, m.args))
        self._synth[key] = (t, d)
        return t, d

    def check(self, ctx: Context, m: Object, t: BaseKind) -> Derivation:
        s, d = self.synth(ctx, m)
        if alpha_eq(s, t):
            return d
        if s.is_type or t.is_type:
            raise CheckFailure(f"{m} has kind {s}, which cannot be converted to {t}")
        e = self.equal(ctx, s.carrier, t.carrier, TYPE)
        if e is None:
            raise CheckFailure(f"{m} has kind {s}; could not show it equal to {t}")
        return Derivation("conv", Judgement(ctx, Typing(m, t)), (d, e))

    # -- equality

    def equal(self, ctx: Context, m: Object, n: Object, t: BaseKind) -> Derivation | None:
        key = (ctx, m, n, t)
        if key in self._equal:
            return self._equal[key]
        self._equal[key] = None  # guards against cycles through conversions
        try:
            d = self._equal_search(ctx, m, n, t)
        except (CheckFailure, ArityError) as e:
            self.last_reason = str(e)
            d = None
        self._equal[key] = d
        return d

    def _surface(self, m: Object) -> tuple:
        return canon(erase(m)) if self.labelled else canon(m)

    def _equal_search(self, ctx, m, n, t) -> Derivation | None:
        if alpha_eq(m, n):
            return Derivation("ref", Judgement(ctx, Equality(m, n, t)), (self.check(ctx, m, t),))
        if self.labelled and self._surface(m) == self._surface(n):
            return self.congruence(ctx, m, n, t)
        # each side maps a surface key to (term, key of predecessor, step)
        sides = [{self._surface(m): (m, None, None)}, {self._surface(n): (n, None, None)}]
        budget = [self.fuel]
        meet = self._chase(sides, (m, n), budget)
        if meet is None:
            meet = self._breadth_first(sides, budget)
        if meet is None:
            self.exhausted = budget[0] <= 0
            self.last_reason = f"no common reduct of {m} and {n} within fuel {self.fuel}"
            return None
        left = self._chain(sides[0], meet)
        right = self._chain(sides[1], meet)
        d = self._compose(ctx, m, left, t)
        p_left = left[-1][1] if left else m
        p_right = right[-1][1] if right else n
        if not alpha_eq(p_left, p_right):
            d = self._trans(ctx, d, self.congruence(ctx, p_left, p_right, t))
        r = self._compose(ctx, n, right, t)
        if r is not None:
            r = self._sym(r)
            d = self._trans(ctx, d, r)
        return d

    def _chase(self, sides, starts, budget) -> object:
        """Leftmost-outermost reduction of both sides in lockstep."""
        heads = list(starts)
        live = [True, True]
        while budget[0] > 0 and any(live):
            for turn in (0, 1):
                if not live[turn] or budget[0] <= 0:
                    continue
                u = heads[turn]
                budget[0] -= 1
                steps = self.rewrites(u)
                if not steps:
                    live[turn] = False
                    continue
                u2, ident, pos = steps[0]
                k = self._surface(u2)
                if k in sides[turn]:
                    live[turn] = False
                    continue
                sides[turn][k] = (u2, self._surface(u), (ident, pos))
                heads[turn] = u2
                if k in sides[1 - turn]:
                    return k
        return None

    def _breadth_first(self, sides, budget) -> object:
        """Breadth-first search from everything reached so far, both ends."""
        queues = [deque(u for u, _, _ in side.values()) for side in sides]
        expanded: list[set] = [set(), set()]
        turn = 0
        while budget[0] > 0 and (queues[0] or queues[1]):
            if not queues[turn]:
                turn = 1 - turn
            u = queues[turn].popleft()
            uk = self._surface(u)
            if uk in expanded[turn]:
                continue
            expanded[turn].add(uk)
            budget[0] -= 1
            for u2, ident, pos in self.rewrites(u):
                k = self._surface(u2)
                if k in sides[turn]:
                    continue
                sides[turn][k] = (u2, uk, (ident, pos))
                if k in sides[1 - turn]:
                    return k
                queues[turn].append(u2)
            turn = 1 - turn
        return None

    def rewrites(self, m: Object) -> list[tuple[Object, str, Position]]:
        out = []
        for pos in positions(m):
            s = subterm_at(m, pos)
            for e in self._eqs:
                fs = match_equation(e, s)
                if fs is not None:
                    out.append((replace_at(m, pos, instantiate_seq(fs, e.context.dom, e.right)), e.ident, pos))
        return out

    @staticmethod
    def _chain(side: dict, key) -> list[tuple[Object, Object, tuple]]:
        steps = []
        term, prev, how = side[key]
        while prev is not None:
            before = side[prev][0]
            steps.append((before, term, how))
            term, prev, how = side[prev]
        steps.reverse()
        return steps

    def _compose(self, ctx, start, steps, t) -> Derivation | None:
        d = None
        for before, after, (ident, pos) in steps:
            s = self.step(ctx, before, ident, pos, t)
            d = s if d is None else self._trans(ctx, d, s)
        return d

    def _trans(self, ctx, a: Derivation | None, b: Derivation | None) -> Derivation | None:
        if a is None:
            return b
        if b is None:
            return a
        ea, eb = a.conclusion.body, b.conclusion.body
        return Derivation("trans", Judgement(ctx, Equality(ea.left, eb.right, ea.kind)), (a, b))

    @staticmethod
    def _sym(a: Derivation) -> Derivation:
        e = a.conclusion.body
        return Derivation("sym", Judgement(a.conclusion.context, Equality(e.right, e.left, e.kind)), (a,))

    def _retarget(self, ctx, d: Derivation, got: BaseKind, t: BaseKind) -> Derivation:
        """Move an equality derivation at kind `got` over to kind t."""
        if alpha_eq(got, t):
            return d
        if got.is_type or t.is_type:
            raise CheckFailure(f"cannot convert an equality at {got} to {t}")
        e = self.equal(ctx, got.carrier, t.carrier, TYPE)
        if e is None:
            raise CheckFailure(f"could not show {got} equal to {t}")
        body = d.conclusion.body
        return Derivation("conv_eq", Judgement(ctx, Equality(body.left, body.right, t)), (d, e))

    def step(self, ctx: Context, u: Object, ident: str, pos: Position, t: BaseKind) -> Derivation:
        """A derivation of u = u' : t for the rewrite of u at pos by ident."""
        decl = self.spec.equation(ident)
        if not pos:
            fs = match_equation(decl, u)
            if fs is None:
                raise CheckFailure(f"equation {ident} no longer matches {u}")
            lhs = instantiate_seq(fs, decl.context.dom, decl.left)
            rhs = instantiate_seq(fs, decl.context.dom, decl.right)
            k = instantiate_seq(fs, decl.context.dom, decl.kind)
            prem = self.defined(DefinedJudgement(ctx, SeqSat(fs, decl.context)))
            d = Derivation("eq", Judgement(ctx, Equality(lhs, rhs, k)), prem, InstData(ident, fs))
            if not alpha_eq(lhs, u):
                # only the labels differ: bridge them by congruence
                d = self._trans(ctx, self.congruence(ctx, u, lhs, k), d)
            return self._retarget(ctx, d, k, t)
        i = pos[0]
        sub = subterm_at(u.args[i].body, pos[1:])
        fs = match_equation(decl, sub)
        if fs is None:
            raise CheckFailure(f"equation {ident} does not match at {pos}")
        new_sub = instantiate_seq(fs, decl.context.dom, decl.right)
        u2 = replace_at(u, pos, new_sub)
        k = self.head_kind(ctx, u.head)
        members = expand_defined(DefinedJudgement(ctx, SeqEq(u.args, u2.args, k.telescope)), self.labelled)
        if members is None:
            raise CheckFailure("undefined congruence premise")
        prem = []
        for j in members:
            b = j.body
            if isinstance(b, Equality) and not alpha_eq(b.left, b.right) and self._surface(b.left) != self._surface(b.right):
                prem.append(self.step(j.context, b.left, ident, pos[1:], b.kind))
            else:
                prem.append(self.derive(j))
        got = instantiate_seq(u.args, k.telescope.dom, k.target)
        rule = "var_eq" if u.head.is_var else "const_eq"
        d = Derivation(rule, Judgement(ctx, Equality(u, u2, got)), tuple(prem))
        return self._retarget(ctx, d, got, t)

    def congruence(self, ctx: Context, m: Object, n: Object, t: BaseKind) -> Derivation:
        """m = n from equal heads and componentwise equal arguments."""
        if m.head != n.head:
            raise CheckFailure(f"{m} and {n} have different heads")
        k = self.head_kind(ctx, m.head)
        prem = self.defined(DefinedJudgement(ctx, SeqEq(m.args, n.args, k.telescope)))
        got = instantiate_seq(m.args, k.telescope.dom, k.target)
        rule = "var_eq" if m.head.is_var else "const_eq"
        d = Derivation(rule, Judgement(ctx, Equality(m, n, got)), prem)
        return self._retarget(ctx, d, got, t)


def synth_kind(spec: Specification, ctx: Context, m: Object, fuel: int = DEFAULT_FUEL) -> tuple[BaseKind, Derivation]:
    k = Kernel(spec, fuel)
    k.valid(ctx)
    return k.synth(ctx, m)


def check_equal(spec: Specification, ctx: Context, m: Object, n: Object, t: BaseKind,
                fuel: int = DEFAULT_FUEL) -> Derivation | None:
    return Kernel(spec, fuel).equal(ctx, m, n, t)


# ---------------------------------------------------------------------------
# orderability and goodness


@dataclasses.dataclass
class OrderingResult:
    ok: bool
    order: tuple[str, ...] = ()
    reason: str = ""
    obligations: dict[str, list[Derivation]] = dataclasses.field(default_factory=dict)


def _depends(d: Declaration) -> set[str]:
    from tfkernel.tf_core import constants

    match d:
        case ConstDecl(sym, k):
            return {c.name for c in constants(k)} - {sym.name}
        case EqDecl(_, ctx, m, n, t):
            return {c.name for c in constants((ctx, m, n, t))}


def orderable(spec: Specification, fuel: int = DEFAULT_FUEL) -> OrderingResult:
    decls = list(spec.declarations)
    idents = [d.ident for d in decls]
    deps = {d.ident: _depends(d) for d in decls}
    for d in decls:
        unknown = deps[d.ident] - set(idents)
        if unknown:
            return OrderingResult(False, reason=f"{d.ident} uses undeclared {', '.join(sorted(unknown))}")
    for d in decls:
        if isinstance(d, ConstDecl) and d.symbol.name in deps[d.ident]:
            return OrderingResult(False, reason=f"{d.ident} mentions itself")
    placed: list[str] = []
    remaining = list(idents)
    while remaining:
        ready = [i for i in remaining if deps[i] <= set(placed)]
        if not ready:
            return OrderingResult(False, reason="dependency cycle among " + ", ".join(remaining))
        placed.append(ready[0])
        remaining.remove(ready[0])
    result = OrderingResult(True, tuple(placed))
    by_id = {d.ident: d for d in decls}
    for i, ident in enumerate(placed):
        prefix = spec.restrict(placed[:i])
        kern = Kernel(prefix, fuel)
        d = by_id[ident]
        try:
            match d:
                case ConstDecl(_, k):
                    ders = list(kern.defined(DefinedJudgement(EMPTY, KindWf(k))))
                case EqDecl(_, ctx, m, n, t):
                    ders = [kern.check(ctx, m, t), kern.check(ctx, n, t)]
                    ders += list(kern.defined(DefinedJudgement(ctx, KindWf(kind(t)))))
        except (CheckFailure, ArityError) as e:
            return OrderingResult(False, tuple(placed), f"obligation of {ident} fails: {e}")
        result.obligations[ident] = ders
    return result


def classify_goodness(spec: Specification, fuel: int = DEFAULT_FUEL) -> GoodnessClass:
    if not spec.equations:
        return GoodnessClass(GOOD, "no equation declarations")
    res = orderable(spec, fuel)
    top = spec_order(spec)
    if not res.ok:
        return GoodnessClass(UNKNOWN, f"not orderable: {res.reason}")
    if top <= 2:
        return GoodnessClass(TWO_GOOD, f"orderable, max order {top}")
    return GoodnessClass(UNKNOWN, f"orderable, max order {top}")


# ---------------------------------------------------------------------------
# profiles


SPAR_OMEGA_MINUS = "sparOmegaMinus"
SPAR_TWO = "sparTwo"


@dataclasses.dataclass(frozen=True)
class Violation:
    where: str
    variable: str
    kind: str
    reason: str

    def __str__(self) -> str:
        return f"{self.where}: {self.variable} : {self.kind} ({self.reason})"


def is_small(k: ProductKind) -> bool:
    """Small kinds are those in which the symbol Type does not occur."""
    if k.target.is_type:
        return False
    return all(is_small(sk) for _, sk in k.telescope.entries)


def _kind_text(k: ProductKind) -> str:
    from tfkernel import syntax

    return syntax.print_kind(k)


def _scan_context(where: str, ctx: Context, profile: str, out: list[Violation]) -> None:
    for x, k in ctx.entries:
        if not is_small(k):
            out.append(Violation(where, x.name, _kind_text(k), "large kind"))
        elif profile == SPAR_TWO and order_of(k.arity) > 1:
            out.append(Violation(where, x.name, _kind_text(k), f"order {order_of(k.arity)} exceeds 1"))
        _scan_context(where, k.telescope, profile, out)


def _scan_abstractions(where: str, x, profile: str, out: list[Violation]) -> None:
    match x:
        case Object(_, args):
            for a in args:
                _scan_abstractions(where, a, profile, out)
        case Abstraction(binders, body, labels):
            if labels is not None:
                _scan_context(where, Context(tuple(zip(binders, labels))), profile, out)
            _scan_abstractions(where, body, profile, out)
        case BaseKind(c):
            if c is not None:
                _scan_abstractions(where, c, profile, out)
        case ProductKind(tel, target):
            for _, k in tel.entries:
                _scan_abstractions(where, k, profile, out)
            _scan_abstractions(where, target, profile, out)
        case Context(entries):
            for _, k in entries:
                _scan_abstractions(where, k, profile, out)
        case tuple():
            for y in x:
                _scan_abstractions(where, y, profile, out)


def check_profile(x: Specification | Judgement, profile: str) -> list[Violation]:
    out: list[Violation] = []
    if isinstance(x, Judgement):
        _scan_context("judgement", x.context, profile, out)
        _scan_abstractions("judgement", x.context, profile, out)
        match x.body:
            case Typing(m, t):
                _scan_abstractions("judgement", (m, t), profile, out)
            case Equality(m, n, t):
                _scan_abstractions("judgement", (m, n, t), profile, out)
        return out
    for d in x.declarations:
        match d:
            case ConstDecl(sym, k):
                _scan_context(sym.name, k.telescope, profile, out)
                _scan_abstractions(sym.name, k, profile, out)
            case EqDecl(ident, ctx, m, n, t):
                if profile == SPAR_OMEGA_MINUS:
                    out.append(Violation(ident, "-", "-", "equation declarations are not allowed"))
                else:
                    _scan_context(ident, ctx, profile, out)
                    _scan_abstractions(ident, (ctx, m, n, t), profile, out)
    return out


# ---------------------------------------------------------------------------
# injectivity of type constructors


@dataclasses.dataclass
class SplitResult:
    derivations: list[Derivation]
    rederived: int  # members that had to be rebuilt by the kernel


def injectivity_split(spec: Specification, d: Derivation, fuel: int = DEFAULT_FUEL) -> SplitResult:
    """From Gamma |- c F = c G : Type, derivations of every member of
    Gamma ||- F = G :: Theta, where c : (Theta)Type."""
    for e in spec.equations:
        if e.kind.is_type:
            raise CheckFailure(f"Type-valued equation present: {e.ident}")
    j = d.conclusion
    if not isinstance(j.body, Equality) or not j.body.kind.is_type:
        raise CheckFailure("derivation does not conclude an equality of types")
    m, n = j.body.left, j.body.right
    if m.head.is_var or m.head != n.head:
        raise CheckFailure("both sides must be headed by the same constant")
    k = spec.constant_kind(m.head)
    if k is None or not k.target.is_type:
        raise CheckFailure(f"{m.head.name} is not declared with a kind (Theta)Type")
    kern = Kernel(spec, fuel)
    pool = _split(kern, d)
    want = expand_defined(DefinedJudgement(j.context, SeqEq(m.args, n.args, k.telescope)), spec.labelled)
    out, rebuilt = [], 0
    bykey = {p.conclusion.key(): p for p in pool}
    for w in want:
        hit = bykey.get(w.key())
        if hit is None:
            hit = kern.derive(w)
            rebuilt += 1
        out.append(hit)
    return SplitResult(out, rebuilt)


def _split(kern: Kernel, d: Derivation) -> list[Derivation]:
    """Component derivations read off a derivation of c F = X : Type."""
    match d.rule:
        case "const_eq":
            return list(d.premises)
        case "ref":
            typing_d = d.premises[0]
            if typing_d.rule != "const":
                raise CheckFailure("typing of a constructor application must end in (const)")
            out = []
            for p in typing_d.premises:
                b = p.conclusion.body
                if isinstance(b, Typing):
                    out.append(Derivation("ref", Judgement(p.conclusion.context, Equality(b.term, b.term, b.kind)), (p,)))
                else:
                    out.append(p)
            return out
        case "sym":
            inner = _split(kern, d.premises[0])
            out = []
            for p in inner:
                b = p.conclusion.body
                out.append(Kernel._sym(p) if isinstance(b, Equality) else p)
            return out
        case "trans":
            a = {p.conclusion.key(): p for p in _split(kern, d.premises[0])}
            b = _split(kern, d.premises[1])
            out = list(a.values())
            for q in b:
                qb = q.conclusion.body
                if not isinstance(qb, Equality):
                    out.append(q)
                    continue
                for p in list(a.values()):
                    pb = p.conclusion.body
                    if (isinstance(pb, Equality) and p.conclusion.context == q.conclusion.context
                            and alpha_eq(pb.right, qb.left) and alpha_eq(pb.kind, qb.kind)):
                        out.append(kern._trans(q.conclusion.context, p, q))
                out.append(q)
            return out
        case "eq":
            raise CheckFailure("an equation of the specification cannot conclude an equality of types")
    raise CheckFailure(f"unexpected rule ({d.rule}) in an equality of types")


# ---------------------------------------------------------------------------
# weakening, as a transformation on derivations


def weaken(d: Derivation, gamma: Context, delta: Context, kern: Kernel) -> Derivation:
    """Replace the context prefix gamma by delta (a valid extension of gamma)
    throughout a derivation whose conclusion context extends gamma."""
    cache: dict[int, Derivation] = {}
    n = len(gamma)
    delta_valid = kern.valid(delta)

    def ctx_map(c: Context) -> Context:
        if c.entries[:n] != gamma.entries:
            raise CheckFailure("derivation leaves the weakened prefix")
        return Context(delta.entries + c.entries[n:])

    def go(x: Derivation) -> Derivation:
        hit = cache.get(id(x))
        if hit is not None:
            return hit
        c = x.conclusion.context
        if isinstance(x.conclusion.body, Valid) and c == gamma:
            out = delta_valid
        else:
            new_j = Judgement(ctx_map(c), x.conclusion.body)
            out = Derivation(x.rule, new_j, tuple(go(p) for p in x.premises), x.data)
        cache[id(x)] = out
        return out

    return go(d)
