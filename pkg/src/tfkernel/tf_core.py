"""TF syntax: symbols, objects, abstractions, kinds and contexts, together with
alpha-equivalence, eta-long forms, hereditary instantiation and employment.

A single syntax core serves both TF and TF_k.  An abstraction may carry kind
labels on its binders (TF_k) or none at all (TF).
"""

from __future__ import annotations

import dataclasses
import typing

from tfkernel.arity import BASE, Arity, order_of

VARIABLE = "variable"
CONSTANT = "constant"


class ArityError(ValueError):
    """Raised eagerly on ill-aritied syntax; `where` names the offending spot."""

    def __init__(self, message: str, where: str = ""):
        super().__init__(f"{message} at {where}" if where else message)
        self.where = where


@dataclasses.dataclass(frozen=True)
class Symbol:
    name: str
    sort: str
    arity: Arity = BASE

    def __str__(self) -> str:
        return self.name

    @property
    def is_var(self) -> bool:
        return self.sort == VARIABLE


def var(name: str, arity: Arity = BASE) -> Symbol:
    return Symbol(name, VARIABLE, arity)


def const(name: str, arity: Arity = BASE) -> Symbol:
    return Symbol(name, CONSTANT, arity)


@dataclasses.dataclass(frozen=True)
class Object:
    head: Symbol
    args: tuple[Abstraction, ...] = ()

    def __post_init__(self):
        wanted = self.head.arity.children
        if len(wanted) != len(self.args):
            raise ArityError(
                f"{self.head.name} of arity {self.head.arity} given {len(self.args)} arguments",
                self.head.name,
            )
        for i, (a, g) in enumerate(zip(wanted, self.args)):
            if g.arity != a:
                raise ArityError(
                    f"argument {i} of {self.head.name} has arity {g.arity}, expected {a}",
                    f"{self.head.name}.{i}",
                )

    def __str__(self) -> str:
        if not self.args:
            return self.head.name
        return f"{self.head.name}[{', '.join(str(a) for a in self.args)}]"


@dataclasses.dataclass(frozen=True)
class Abstraction:
    binders: tuple[Symbol, ...]
    body: Object
    labels: tuple[ProductKind, ...] | None = None

    def __post_init__(self):
        if self.labels is not None and not self.binders:
            object.__setattr__(self, "labels", None)
        names = [b.name for b in self.binders]
        if len(set(names)) != len(names):
            raise ArityError(f"repeated binder in [{', '.join(names)}]")
        if any(not b.is_var for b in self.binders):
            raise ArityError("abstraction binds a constant")
        if self.labels is not None:
            if len(self.labels) != len(self.binders):
                raise ArityError("label count differs from binder count")
            for b, k in zip(self.binders, self.labels):
                if k.arity != b.arity:
                    raise ArityError(f"label of {b.name} has arity {k.arity}, expected {b.arity}", b.name)

    @property
    def arity(self) -> Arity:
        return Arity(tuple(b.arity for b in self.binders))

    @property
    def labelled(self) -> bool:
        return self.labels is not None

    def context(self) -> Context:
        if self.labels is None:
            raise ValueError("unlabelled abstraction has no binder context")
        return Context(tuple(zip(self.binders, self.labels)))

    def __str__(self) -> str:
        if not self.binders:
            return str(self.body)
        if self.labels is None:
            bs = ", ".join(b.name for b in self.binders)
        else:
            bs = ", ".join(f"{b.name} : {k}" for b, k in zip(self.binders, self.labels))
        return f"[{bs}]{self.body}"


def abstraction_of(obj: Object) -> Abstraction:
    """The 0-ary abstraction []M, written simply M."""
    return Abstraction((), obj)


@dataclasses.dataclass(frozen=True)
class BaseKind:
    carrier: Object | None = None

    @property
    def is_type(self) -> bool:
        return self.carrier is None

    def __str__(self) -> str:
        return "Type" if self.carrier is None else f"El({self.carrier})"


TYPE = BaseKind()


def El(a: Object) -> BaseKind:
    return BaseKind(a)


@dataclasses.dataclass(frozen=True)
class Context:
    entries: tuple[tuple[Symbol, ProductKind], ...] = ()

    def __post_init__(self):
        names = [s.name for s, _ in self.entries]
        if len(set(names)) != len(names):
            raise ArityError(f"context repeats a variable: {', '.join(names)}")
        for s, k in self.entries:
            if not s.is_var:
                raise ArityError(f"context entry {s.name} is not a variable", s.name)
            if k.arity != s.arity:
                raise ArityError(f"{s.name} has arity {s.arity} but its kind has arity {k.arity}", s.name)

    def __len__(self) -> int:
        return len(self.entries)

    def __add__(self, other: Context) -> Context:
        return Context(self.entries + other.entries)

    def extend(self, x: Symbol, k: ProductKind) -> Context:
        return Context(self.entries + ((x, k),))

    @property
    def dom(self) -> tuple[Symbol, ...]:
        return tuple(s for s, _ in self.entries)

    @property
    def names(self) -> set[str]:
        return {s.name for s, _ in self.entries}

    @property
    def arity(self) -> Arity:
        return Arity(tuple(s.arity for s, _ in self.entries))

    @property
    def order(self) -> int:
        return order_of(self.arity)

    def lookup(self, x: Symbol) -> ProductKind | None:
        for s, k in reversed(self.entries):
            if s == x:
                return k
        return None

    def lookup_name(self, name: str) -> tuple[Symbol, ProductKind] | None:
        for s, k in reversed(self.entries):
            if s.name == name:
                return s, k
        return None

    def prefix(self, n: int) -> Context:
        return Context(self.entries[:n])

    def __str__(self) -> str:
        return ", ".join(f"{s.name} : {k}" for s, k in self.entries)


EMPTY = Context()


@dataclasses.dataclass(frozen=True)
class ProductKind:
    telescope: Context = EMPTY
    target: BaseKind = TYPE

    @property
    def arity(self) -> Arity:
        return self.telescope.arity

    @property
    def is_base(self) -> bool:
        return not self.telescope.entries

    def __str__(self) -> str:
        if self.is_base:
            return str(self.target)
        return f"({self.telescope}){self.target}"


def kind(target: BaseKind) -> ProductKind:
    return ProductKind(EMPTY, target)


KTYPE = kind(TYPE)

Entity = typing.Union[Object, Abstraction, BaseKind, ProductKind, Context, tuple]


# ---------------------------------------------------------------------------
# names, free variables, size


def free_vars(x: Entity) -> frozenset[Symbol]:
    match x:
        case Object(head, args):
            own = frozenset([head]) if head.is_var else frozenset()
            return own.union(*(free_vars(a) for a in args))
        case Abstraction(binders, body, labels):
            return _fv_scope(binders, labels, free_vars(body))
        case BaseKind(carrier):
            return frozenset() if carrier is None else free_vars(carrier)
        case ProductKind(tel, target):
            return _fv_scope(tel.dom, [k for _, k in tel.entries], free_vars(target))
        case Context(entries):
            return _fv_scope([s for s, _ in entries], [k for _, k in entries], frozenset())
        case tuple() | list():
            return frozenset().union(*(free_vars(a) for a in x))
        case None:
            return frozenset()
    raise TypeError(f"free_vars of {type(x).__name__}")


def _fv_scope(binders, labels, inner: frozenset[Symbol]) -> frozenset[Symbol]:
    acc = inner
    labels = labels if labels is not None else [None] * len(binders)
    for b, k in reversed(list(zip(binders, labels))):
        acc = acc - {b}
        if k is not None:
            acc = acc | free_vars(k)
    return acc


def symbols(x: Entity) -> set[Symbol]:
    """Every symbol occurring anywhere in x, bound or free."""
    out: set[Symbol] = set()
    _collect(x, out)
    return out


def _collect(x, out: set[Symbol]) -> None:
    match x:
        case Object(head, args):
            out.add(head)
            for a in args:
                _collect(a, out)
        case Abstraction(binders, body, labels):
            out.update(binders)
            for k in labels or ():
                _collect(k, out)
            _collect(body, out)
        case BaseKind(carrier):
            if carrier is not None:
                _collect(carrier, out)
        case ProductKind(tel, target):
            _collect(tel, out)
            _collect(target, out)
        case Context(entries):
            for s, k in entries:
                out.add(s)
                _collect(k, out)
        case tuple() | list():
            for a in x:
                _collect(a, out)
        case None:
            pass


def names(x: Entity) -> set[str]:
    return {s.name for s in symbols(x)}


def constants(x: Entity) -> set[Symbol]:
    return {s for s in symbols(x) if not s.is_var}


def size(x: Entity) -> int:
    match x:
        case Object(_, args):
            return 1 + sum(size(a) for a in args)
        case Abstraction(_, body, labels):
            return size(body) + sum(size(k) for k in labels or ())
        case BaseKind(carrier):
            return 1 if carrier is None else 1 + size(carrier)
        case ProductKind(tel, target):
            return size(tel) + size(target)
        case Context(entries):
            return sum(size(k) for _, k in entries)
        case tuple() | list():
            return sum(size(a) for a in x)
    raise TypeError(f"size of {type(x).__name__}")


def fresh(base: str, avoid: typing.Collection[str]) -> str:
    name = base
    while name in avoid:
        name += "'"
    return name


# ---------------------------------------------------------------------------
# alpha-equivalence by positional renaming


def canon(x: Entity, env: dict[Symbol, int] | None = None) -> tuple:
    """A name-free rendering of x: bound symbols become binding depths."""
    return _canon(x, dict(env or {}), len(env or {}))


def _canon(x, env: dict[Symbol, int], depth: int) -> tuple:
    match x:
        case Object(head, args):
            h = ("b", env[head]) if head in env else (head.sort, head.name, head.arity)
            return ("o", h, tuple(_canon(a, env, depth) for a in args))
        case Abstraction(binders, body, labels):
            env = dict(env)
            labs = []
            for i, b in enumerate(binders):
                if labels is not None:
                    labs.append(_canon(labels[i], env, depth))
                env[b] = depth
                depth += 1
            lab_part = tuple(labs) if labels is not None else None
            return ("a", tuple(b.arity for b in binders), lab_part, _canon(body, env, depth))
        case BaseKind(carrier):
            return ("T",) if carrier is None else ("El", _canon(carrier, env, depth))
        case ProductKind(tel, target):
            env = dict(env)
            parts, depth = _canon_entries(tel.entries, env, depth)
            return ("k", parts, _canon(target, env, depth))
        case Context(entries):
            parts, _ = _canon_entries(entries, dict(env), depth)
            return ("c", parts)
        case tuple() | list():
            return ("s",) + tuple(_canon(a, env, depth) for a in x)
    raise TypeError(f"canon of {type(x).__name__}")


def _canon_entries(entries, env, depth):
    parts = []
    for s, k in entries:
        parts.append((s.arity, _canon(k, env, depth)))
        env[s] = depth
        depth += 1
    return tuple(parts), depth


def canon_under(ctx: Context, *xs: Entity) -> tuple:
    """Canonical form of entities viewed under the binders of ctx."""
    env: dict[Symbol, int] = {}
    parts, depth = _canon_entries(ctx.entries, env, 0)
    return (parts,) + tuple(_canon(x, env, depth) for x in xs)


def alpha_eq(x: Entity, y: Entity) -> bool:
    if x is y:
        return True
    return canon(x) == canon(y)


# ---------------------------------------------------------------------------
# instantiation

Subst = dict  # Symbol -> Symbol (renaming) | Abstraction (instantiation)


class _Trace:
    """Records (caller measure, callee measure) pairs of object-level calls."""

    def __init__(self):
        self.edges: list[tuple[tuple[int, int], tuple[int, int]]] = []


def _measure(sigma: Subst, x: Object) -> tuple[int, int]:
    orders = [order_of(k.arity) for k, v in sigma.items() if isinstance(v, Abstraction)]
    return (max(orders, default=-1), size(x))


def _inst(x, sigma: Subst, trace: _Trace | None = None, parent=None):
    if not sigma:
        return x
    match x:
        case Object(head, args):
            here = None
            if trace is not None:
                here = _measure(sigma, x)
                if parent is not None:
                    trace.edges.append((parent, here))
            new_args = tuple(_inst(a, sigma, trace, here) for a in args)
            v = sigma.get(head)
            if v is None:
                return Object(head, new_args)
            if isinstance(v, Symbol):
                return Object(v, new_args)
            return _apply(v, new_args, trace, here)
        case Abstraction(binders, body, labels):
            ents = list(zip(binders, labels if labels is not None else [None] * len(binders)))
            new_ents, new_body = _scope(ents, body, sigma, trace, parent)
            return Abstraction(
                tuple(b for b, _ in new_ents),
                new_body,
                None if labels is None else tuple(k for _, k in new_ents),
            )
        case BaseKind(carrier):
            return x if carrier is None else BaseKind(_inst(carrier, sigma, trace, parent))
        case ProductKind(tel, target):
            new_ents, new_target = _scope(list(tel.entries), target, sigma, trace, parent)
            return ProductKind(Context(tuple(new_ents)), new_target)
        case Context(entries):
            new_ents, _ = _scope(list(entries), None, sigma, trace, parent)
            return Context(tuple(new_ents))
        case tuple():
            return tuple(_inst(a, sigma, trace, parent) for a in x)
    raise TypeError(f"cannot instantiate into {type(x).__name__}")


def _apply(f: Abstraction, args: tuple[Abstraction, ...], trace, parent) -> Object:
    """The second defining clause: {F/x}x[G] contracts against F's binders."""
    return _inst(f.body, dict(zip(f.binders, args)), trace, parent)


def _value_names(v) -> set[str]:
    if isinstance(v, Symbol):
        return {v.name}
    return {s.name for s in free_vars(v)}


def _scope(entries, body, sigma: Subst, trace, parent):
    """Push a substitution under a telescope of binders, renaming on capture."""
    sigma = dict(sigma)
    out = []
    rest_syms = [symbols([k for _, k in entries[i + 1:]] + ([body] if body is not None else []))
                 for i in range(len(entries))]
    for i, (b, k) in enumerate(entries):
        k2 = _inst(k, sigma, trace, parent) if k is not None else None
        sigma.pop(b, None)
        b2 = b
        if sigma:
            occurring = rest_syms[i]
            danger: set[str] = set()
            for key, v in sigma.items():
                if key in occurring:
                    danger |= _value_names(v)
            if b.name in danger:
                avoid = danger | {s.name for s in occurring} | {e.name for e, _ in entries}
                avoid |= {e.name for e, _ in out}
                b2 = Symbol(fresh(b.name, avoid), b.sort, b.arity)
                sigma[b] = b2
        out.append((b2, k2))
    new_body = _inst(body, sigma, trace, parent) if body is not None else None
    return out, new_body


def _check_pair(f: Abstraction, x: Symbol) -> None:
    if not x.is_var:
        raise ArityError(f"cannot instantiate the constant {x.name}", x.name)
    if f.arity != x.arity:
        raise ArityError(f"abstraction of arity {f.arity} for variable {x.name} of arity {x.arity}", x.name)


def instantiate(f: Abstraction, x: Symbol, n: Entity):
    """{F/x}N with hereditary contraction; N may be any entity."""
    _check_pair(f, x)
    return _inst(n, {x: f})


def instantiate_traced(f: Abstraction, x: Symbol, n: Object):
    """Like instantiate, also returning the measure pair of every nested call."""
    _check_pair(f, x)
    tr = _Trace()
    return _inst(n, {x: f}, tr, None), tr.edges


def rename(x: Entity, mapping: dict[Symbol, Symbol]):
    """Capture-avoiding renaming of free variables."""
    for a, b in mapping.items():
        if a.arity != b.arity:
            raise ArityError(f"renaming {a.name} to {b.name} changes arity")
    return _inst(x, dict(mapping))


def instantiate_seq(fs: typing.Sequence[Abstraction], xs, x: Entity):
    """{F1/x1, ..., Fn/xn}X.

    xs is a variable sequence or a Context.  The Fi are substituted at once,
    which is the same as instantiating left to right after the xi have been
    renamed away from the free variables of the Fi.
    """
    if isinstance(xs, Context):
        xs = xs.dom
    xs = tuple(xs)
    fs = tuple(fs)
    if len(fs) != len(xs):
        raise ArityError(f"{len(fs)} abstractions for {len(xs)} variables")
    for f, v in zip(fs, xs):
        _check_pair(f, v)
    return _inst(x, dict(zip(xs, fs)))


def employ(f: Abstraction, g: Abstraction) -> Abstraction:
    if not f.binders:
        raise ArityError("employing an abstraction with no binders")
    x = f.binders[0]
    if x.arity != g.arity:
        raise ArityError(f"employing {x.name} of arity {x.arity} on an abstraction of arity {g.arity}", x.name)
    rest = Abstraction(f.binders[1:], f.body, None if f.labels is None else f.labels[1:])
    return _inst(rest, {x: g})


def employ_seq(f: Abstraction, gs: typing.Sequence[Abstraction]) -> Abstraction:
    for g in gs:
        f = employ(f, g)
    return f


# ---------------------------------------------------------------------------
# eta-long forms


def eta_long(z: Symbol, avoid: typing.Collection[str] = ()) -> Abstraction:
    """z^eta: the fully expanded abstraction standing for z."""
    taken = set(avoid) | {z.name}
    binders = []
    for a in z.arity.children:
        n = fresh("x", taken)
        taken.add(n)
        binders.append(var(n, a))
    args = tuple(eta_long(b, taken) for b in binders)
    return Abstraction(tuple(binders), Object(z, args))


def eta_long_at(z: Symbol, k: ProductKind) -> Abstraction:
    """z^K: the eta-long form of z labelled by the telescope of K."""
    if z.arity != k.arity:
        raise ArityError(f"{z.name} of arity {z.arity} given kind of arity {k.arity}", z.name)
    k = rebind_away(k, {z.name})
    args = tuple(eta_long_at(s, sk) for s, sk in k.telescope.entries)
    return Abstraction(k.telescope.dom, Object(z, args), tuple(sk for _, sk in k.telescope.entries))


def rebind_away(x, avoid: set[str]):
    """Rename the outermost binders of an abstraction, kind or context so that
    none of them is called by a name in avoid."""
    match x:
        case Abstraction(binders, body, labels):
            ents = list(zip(binders, labels if labels is not None else [None] * len(binders)))
            ents, body = _rebind(ents, body, avoid)
            return Abstraction(tuple(b for b, _ in ents), body,
                               None if labels is None else tuple(k for _, k in ents))
        case ProductKind(tel, target):
            ents, target = _rebind(list(tel.entries), target, avoid)
            return ProductKind(Context(tuple(ents)), target)
        case Context(entries):
            ents, _ = _rebind(list(entries), None, avoid)
            return Context(tuple(ents))
    raise TypeError(f"rebind_away on {type(x).__name__}")


def _rebind(entries, body, avoid: set[str]):
    if not any(b.name in avoid for b, _ in entries):
        return entries, body
    taken = set(avoid) | names([k for _, k in entries if k is not None]) | {b.name for b, _ in entries}
    if body is not None:
        taken |= names(body)
    sigma: Subst = {}
    out = []
    for b, k in entries:
        k2 = _inst(k, sigma) if k is not None else None
        b2 = b
        if b.name in avoid:
            b2 = Symbol(fresh(b.name, taken), b.sort, b.arity)
            taken.add(b2.name)
            sigma[b] = b2
        else:
            sigma.pop(b, None)
        out.append((b2, k2))
    return out, (_inst(body, sigma) if body is not None else None)


def rebind_to(x, new: typing.Sequence[Symbol]):
    """Rename the outermost binders of x, in order, to the given symbols."""
    match x:
        case Abstraction(binders, body, labels):
            ents = list(zip(binders, labels if labels is not None else [None] * len(binders)))
        case ProductKind(tel, target):
            ents, body = list(tel.entries), target
        case _:
            raise TypeError(f"rebind_to on {type(x).__name__}")
    if len(new) != len(ents):
        raise ArityError("rebinding with the wrong number of names")
    # go through temporaries so that permutations of names are safe
    clash = {s.name for s in new} | {b.name for b, _ in ents}
    tmp_ents, tmp_body = _rebind(ents, body, clash)
    sigma: Subst = {}
    out = []
    for (b, k), n in zip(tmp_ents, new):
        if n.arity != b.arity:
            raise ArityError(f"rebinding {b.name} to {n.name} changes arity")
        k2 = _inst(k, sigma) if k is not None else None
        sigma[b] = n
        out.append((n, k2))
    tmp_body = _inst(tmp_body, sigma)
    match x:
        case Abstraction():
            return Abstraction(tuple(b for b, _ in out), tmp_body,
                               None if x.labels is None else tuple(k for _, k in out))
        case ProductKind():
            return ProductKind(Context(tuple(out)), tmp_body)


def erase(x):
    """Drop every binder label."""
    match x:
        case Object(head, args):
            return Object(head, tuple(erase(a) for a in args))
        case Abstraction(binders, body, _):
            return Abstraction(binders, erase(body))
        case BaseKind(carrier):
            return x if carrier is None else BaseKind(erase(carrier))
        case ProductKind(tel, target):
            return ProductKind(erase(tel), erase(target))
        case Context(entries):
            return Context(tuple((s, erase(k)) for s, k in entries))
        case tuple():
            return tuple(erase(a) for a in x)
    raise TypeError(f"erase of {type(x).__name__}")


def is_labelled(x) -> bool:
    """True when every abstraction with binders inside x carries labels."""
    match x:
        case Object(_, args):
            return all(is_labelled(a) for a in args)
        case Abstraction(binders, body, labels):
            if binders and labels is None:
                return False
            return all(is_labelled(k) for k in labels or ()) and is_labelled(body)
        case BaseKind(carrier):
            return carrier is None or is_labelled(carrier)
        case ProductKind(tel, target):
            return is_labelled(tel) and is_labelled(target)
        case Context(entries):
            return all(is_labelled(k) for _, k in entries)
        case tuple():
            return all(is_labelled(a) for a in x)
    raise TypeError(type(x).__name__)
