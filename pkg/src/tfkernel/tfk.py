"""Church-style TF_k: erasure of binder labels and the labeling translation
that fills them in from declared kinds.

TF_k terms share the TF data types; an abstraction is TF_k when it carries
labels.  Instantiation and employment in tf_core already carry labels through.
"""

from __future__ import annotations

import dataclasses

from tfkernel.tf_check import (
    CheckFailure,
    CheckReport,
    DefinedJudgement,
    KindWf,
    SeqEq,
    SeqSat,
    expand_defined,
    ConstDecl,
    Derivation,
    EqDecl,
    Equality,
    InstData,
    Judgement,
    Specification,
    Typing,
    Valid,
    check_derivation,
)
from tfkernel.tf_core import (
    EMPTY,
    Abstraction,
    ArityError,
    BaseKind,
    Context,
    Object,
    ProductKind,
    Symbol,
    constants,
    employ,
    employ_seq,
    erase,
    eta_long_at,
    free_vars,
    instantiate,
    instantiate_seq,
    rebind_away,
    rebind_to,
)

# instantiation in TF_k is the shared engine; labels of discarded binders vanish
k_instantiate = instantiate
k_instantiate_seq = instantiate_seq
k_employ = employ
k_employ_seq = employ_seq
eta_long_k = eta_long_at


class LabelError(ValueError):
    """The labeling translation is undefined on this input."""

    def __init__(self, message: str, where: str = ""):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where


# ---------------------------------------------------------------------------
# erasure


def erase_labels(x, spec: Specification | None = None):
    """|x|.  Derivations need the specification their constants come from to drop the
    TF_k-only premises; without it every premise is kept."""
    match x:
        case Judgement(ctx, body):
            match body:
                case Valid():
                    return Judgement(erase(ctx), body)
                case Typing(m, t):
                    return Judgement(erase(ctx), Typing(erase(m), erase(t)))
                case Equality(m, n, t):
                    return Judgement(erase(ctx), Equality(erase(m), erase(n), erase(t)))
        case ConstDecl(sym, k):
            return ConstDecl(sym, erase(k))
        case EqDecl(ident, ctx, m, n, t):
            return EqDecl(ident, erase(ctx), erase(m), erase(n), erase(t))
        case Specification(decls, _):
            return Specification(tuple(erase_labels(d) for d in decls), False)
        case Derivation():
            return _erase_derivation(x, {}, None if spec is None else erase_labels(spec))
    return erase(x)


def _erase_derivation(d: Derivation, memo: dict, spec: Specification | None = None) -> Derivation:
    """Erase a TF_k tree.  Nodes whose premises are the members of a defined
    judgement keep only the members of the TF expansion."""
    hit = memo.get(id(d))
    if hit is None:
        data = None if d.data is None else InstData(d.data.ident, erase(d.data.args))
        concl = erase_labels(d.conclusion)
        premises = tuple(_erase_derivation(p, memo, spec) for p in d.premises)
        dj = _member_judgement(spec, d.rule, concl, data)
        if dj is not None:
            want = expand_defined(dj, False)
            by_key = {}
            for p in premises:
                by_key.setdefault(p.conclusion.key(), p)
            if want is not None and all(w.key() in by_key for w in want):
                premises = tuple(by_key[w.key()] for w in want)
        hit = Derivation(d.rule, concl, premises, data)
        memo[id(d)] = hit
    return hit


def _member_judgement(spec, rule: str, j: Judgement, data) -> DefinedJudgement | None:
    ctx = j.context
    try:
        match rule, j.body:
            case "ctxt", Valid() if ctx.entries:
                return DefinedJudgement(ctx.prefix(len(ctx) - 1), KindWf(ctx.entries[-1][1]))
            case ("var" | "const"), Typing(m, _):
                k = _kind_of_head(spec, ctx, m.head)
                return None if k is None else DefinedJudgement(ctx, SeqSat(m.args, k.telescope))
            case ("var_eq" | "const_eq"), Equality(m, n, _):
                k = _kind_of_head(spec, ctx, m.head)
                return None if k is None else DefinedJudgement(ctx, SeqEq(m.args, n.args, k.telescope))
            case "eq", Equality() if data is not None and spec is not None:
                decl = spec.equation(data.ident)
                return None if decl is None else DefinedJudgement(ctx, SeqSat(data.args, decl.context))
    except (ArityError, CheckFailure):
        return None
    return None


def _kind_of_head(spec, ctx: Context, head: Symbol):
    if head.is_var:
        return ctx.lookup(head)
    return None if spec is None else spec.constant_kind(head)


def erase_derivation(spec: Specification, d: Derivation) -> Derivation:
    return erase_labels(d, spec)


def check_k_derivation(spec: Specification, d: Derivation) -> CheckReport:
    if not spec.labelled:
        spec = Specification(spec.declarations, True)
    return check_derivation(spec, d)


# ---------------------------------------------------------------------------
# definedness


def _undeclared(spec: Specification, ctx: Context, x) -> str | None:
    for c in constants(x):
        if spec.constant_kind(c) is None:
            return f"constant {c.name} is not declared"
    for v in free_vars(x):
        if ctx.lookup(v) is None:
            return f"variable {v.name} is not declared in the context"
    return None


def context_defined(spec: Specification, gamma: Context, delta: Context) -> str | None:
    for i, (x, k) in enumerate(delta.entries):
        why = _undeclared(spec, gamma + delta.prefix(i), k)
        if why:
            return f"{x.name}: {why}"
    return None


def is_consistent(spec: Specification) -> tuple[bool, str]:
    for d in spec.declarations:
        match d:
            case ConstDecl(sym, k):
                why = _undeclared(spec, EMPTY, k)
            case EqDecl(ident, ctx, m, n, t):
                why = context_defined(spec, EMPTY, ctx) or _undeclared(spec, ctx, (m, n, t))
        if why:
            return False, f"{d.ident}: {why}"
    return True, ""


# ---------------------------------------------------------------------------
# labeling


@dataclasses.dataclass
class Labeler:
    spec: Specification

    def head_kind(self, gamma: Context, head: Symbol) -> ProductKind:
        k = gamma.lookup(head) if head.is_var else self.spec.constant_kind(head)
        if k is None:
            what = "variable" if head.is_var else "constant"
            raise LabelError(f"{what} {head.name} is not declared", head.name)
        return k

    def obj(self, gamma: Context, m: Object) -> Object:
        k = self.head_kind(gamma, m.head)
        return Object(m.head, self.seq(gamma, k.telescope, m.args))

    def seq(self, gamma: Context, delta: Context, fs: tuple[Abstraction, ...]) -> tuple[Abstraction, ...]:
        if len(fs) != len(delta):
            raise LabelError(f"{len(fs)} abstractions for a context of length {len(delta)}")
        out = []
        for i, (x, k) in enumerate(delta.entries):
            # the kind is instantiated on the TF side, with the unlabelled prefix
            out.append(self.abstraction(gamma, instantiate_seq(fs[:i], delta.dom[:i], k), fs[i]))
        return tuple(out)

    def abstraction(self, gamma: Context, k: ProductKind, f: Abstraction) -> Abstraction:
        if f.arity != k.arity:
            raise LabelError(f"abstraction of arity {f.arity} against a kind of arity {k.arity}")
        if any(b.name in gamma.names for b in f.binders):
            f = rebind_away(f, gamma.names)
        k = rebind_to(k, f.binders)
        labels = []
        inner = gamma
        for x, kx in k.telescope.entries:
            labels.append(self.kind(inner, kx))
            inner = inner.extend(x, kx)
        body = self.obj(inner, f.body)
        return Abstraction(f.binders, body, tuple(labels) if labels else None)

    def basekind(self, gamma: Context, t: BaseKind) -> BaseKind:
        return t if t.is_type else BaseKind(self.obj(gamma, t.carrier))

    def kind(self, gamma: Context, k: ProductKind) -> ProductKind:
        tel = self.context(gamma, k.telescope)
        return ProductKind(tel, self.basekind(gamma + k.telescope, k.target))

    def context(self, gamma: Context, delta: Context) -> Context:
        out = []
        inner = gamma
        for x, k in delta.entries:
            out.append((x, self.kind(inner, k)))
            inner = inner.extend(x, k)
        return Context(tuple(out))

    def judgement(self, j: Judgement) -> Judgement:
        g = j.context
        lg = self.context(EMPTY, g)
        match j.body:
            case Valid():
                return Judgement(lg, j.body)
            case Typing(m, t):
                return Judgement(lg, Typing(self.obj(g, m), self.basekind(g, t)))
            case Equality(m, n, t):
                return Judgement(lg, Equality(self.obj(g, m), self.obj(g, n), self.basekind(g, t)))

    def specification(self) -> Specification:
        decls = []
        for d in self.spec.declarations:
            match d:
                case ConstDecl(sym, k):
                    decls.append(ConstDecl(sym, self.kind(EMPTY, k)))
                case EqDecl(ident, ctx, m, n, t):
                    decls.append(EqDecl(ident, self.context(EMPTY, ctx), self.obj(ctx, m), self.obj(ctx, n),
                                        self.basekind(ctx, t)))
        return Specification(tuple(decls), True)


def label_entity(spec: Specification, gamma: Context, hint, x):
    """The labeling translation of x relative to spec and gamma.  Abstractions
    need their intended kind as hint, abstraction sequences their context."""
    if spec.labelled:
        spec = erase_labels(spec)
    ok, why = is_consistent(spec)
    if not ok:
        raise LabelError(f"specification is not consistent: {why}")
    lab = Labeler(spec)
    why = context_defined(spec, EMPTY, gamma)
    if why:
        raise LabelError(f"context is not defined: {why}")
    try:
        match x:
            case Object():
                _defined(spec, gamma, x)
                return lab.obj(gamma, x)
            case Abstraction():
                if not isinstance(hint, ProductKind):
                    raise LabelError("an abstraction needs its intended kind")
                _defined(spec, gamma, (x, hint))
                return lab.abstraction(gamma, hint, x)
            case tuple():
                if not isinstance(hint, Context):
                    raise LabelError("an abstraction sequence needs its intended context")
                _defined(spec, gamma, x)
                return lab.seq(gamma, hint, x)
            case BaseKind():
                _defined(spec, gamma, x)
                return lab.basekind(gamma, x)
            case ProductKind():
                _defined(spec, gamma, x)
                return lab.kind(gamma, x)
            case Context():
                why = context_defined(spec, gamma, x)
                if why:
                    raise LabelError(why)
                return lab.context(gamma, x)
            case Judgement():
                return lab.judgement(x)
            case Specification():
                return Labeler(erase_labels(x)).specification()
    except ArityError as e:
        raise LabelError(str(e)) from None
    raise TypeError(f"cannot label {type(x).__name__}")


def _defined(spec, gamma, x):
    why = _undeclared(spec, gamma, x)
    if why:
        raise LabelError(why)


def label_spec(spec: Specification) -> Specification:
    return label_entity(spec, EMPTY, None, spec)


def label_judgement(spec: Specification, j: Judgement) -> Judgement:
    return label_entity(spec, EMPTY, None, j)
