"""Generators and property suites for the labeling translation."""

from __future__ import annotations

import random

from gen import TermGen
from sigma_gen import SIGMA_PI, SigmaGen

from tfkernel import tfk
from tfkernel.arity import Arity
from tfkernel.tf_check import (
    CheckFailure,
    ConstDecl,
    Judgement,
    Kernel,
    Specification,
    Typing,
    check_derivation,
    check_equal,
    rewrite_step,
)
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
    instantiate,
    kind,
    var,
)

LABELLED_SIGMA_PI = tfk.label_spec(SIGMA_PI)


def kind_for(rng: random.Random, arity: Arity, bases: list, n: list[int]) -> ProductKind:
    """A kind of the given arity whose El targets are drawn from bases
    (closed base objects) or, sometimes, from telescope variables."""
    entries = []
    local = []
    for a in arity.children:
        n[0] += 1
        x = var(f"t{n[0]}", a)
        entries.append((x, kind_for(rng, a, bases + local, n)))
        if not a.children:
            local.append(Object(x, ()))
    target = TYPE if not bases or rng.random() < 0.3 else BaseKind(rng.choice(bases))
    return ProductKind(Context(tuple(entries)), target)


def defined_world(seed: int):
    """A random consistent spec and context giving a kind to every symbol a
    TermGen signature uses, together with the generator."""
    gen = TermGen(seed)
    rng = gen.rng
    syms = gen.signature()
    n = [0]
    o = const("o0")
    decls = [ConstDecl(o, kind(TYPE))]
    bases = [Object(o, ())]
    entries = []
    for s in syms:
        if s.is_var:
            entries.append((s, kind_for(rng, s.arity, bases, n)))
        else:
            decls.append(ConstDecl(s, kind_for(rng, s.arity, bases, n)))
    return gen, Specification(tuple(decls)), Context(tuple(entries)), syms


def defined_inputs(seed: int, count: int):
    """(spec, gamma, hint, X) with X defined relative to spec and gamma: a mix
    of typed SIGMA_PI judgements, their pieces, and untyped defined objects."""
    out = []
    g = SigmaGen(seed)
    rng = random.Random(seed)
    world = defined_world(seed)
    while len(out) < count:
        r = rng.random()
        if r < 0.4:
            c, m, t = g.typed()
            choice = rng.random()
            if choice < 0.3:
                out.append((SIGMA_PI, EMPTY, None, Judgement(c, Typing(m, t))))
            elif choice < 0.6 or not m.args:
                out.append((SIGMA_PI, c, None, m))
            else:
                k = g.kernel.head_kind(c, m.head)
                i = rng.randrange(len(m.args))
                out.append((SIGMA_PI, c, k.telescope, m.args))
                hint = _member_kind(k, m.args, i)
                out.append((SIGMA_PI, c, hint, m.args[i]))
        elif r < 0.5:
            c = g.context()
            out.append((SIGMA_PI, EMPTY, None, c))
        else:
            gen, spec, ctx, syms = world
            m = gen.obj(syms, rng.randint(1, 12))
            out.append((spec, ctx, None, m))
            if rng.random() < 0.1:
                world = defined_world(rng.randrange(1 << 30))
    return out[:count]


def _member_kind(k: ProductKind, args, i: int) -> ProductKind:
    from tfkernel.tf_core import instantiate_seq

    return instantiate_seq(args[:i], k.telescope.dom[:i], k.telescope.entries[i][1])


def same_entity(a, b) -> bool:
    from tfkernel.tf_check import same_judgement

    if isinstance(a, Judgement):
        return isinstance(b, Judgement) and same_judgement(a, b)
    if isinstance(a, tuple):
        return len(a) == len(b) and all(alpha_eq(x, y) for x, y in zip(a, b))
    return alpha_eq(a, b)


def erasure_suite(seed: int, count: int) -> tuple[int, list[str]]:
    fails = []
    for i, (spec, gamma, hint, x) in enumerate(defined_inputs(seed, count)):
        try:
            lx = tfk.label_entity(spec, gamma, hint, x)
        except (tfk.LabelError, ArityError) as e:
            fails.append(f"#{i}: labeling undefined: {e}")
            continue
        if not same_entity(tfk.erase_labels(lx), x):
            fails.append(f"#{i}: |L(X)| differs from X for {x}")
    return count, fails


def perturb_labels(g: SigmaGen, m):
    """m with some binder labels replaced by rewriting descendants."""
    match m:
        case Object(head, args):
            return Object(head, tuple(perturb_labels(g, a) for a in args))
        case Abstraction(binders, body, labels):
            if labels is not None:
                labels = tuple(_perturb_kind(g, k) for k in labels)
            return Abstraction(binders, perturb_labels(g, body), labels)
    raise TypeError(type(m))


def _perturb_kind(g: SigmaGen, k: ProductKind) -> ProductKind:
    if k.target.is_type or not rewrite_step(SIGMA_PI, None, k.target.carrier):
        return k
    return ProductKind(k.telescope, BaseKind(g.walk(k.target.carrier, g.rng.randint(1, 3))))


def redex_label_term(g: SigmaGen):
    """A typed lambda whose domain contains a redex, so that its labels do."""
    from sigma_gen import LAM, PI, ab, o

    for _ in range(50):
        c = g.context()
        s, _ = g.convertible_type(c)
        y = g.fresh("x")
        t = BaseKind(o(PI, s, ab(g.type_(c, 1), y)))
        m = g._lam(c, t.carrier, 2)
        if m is None:
            continue
        try:
            g.kernel.check(c, m, t)
        except (CheckFailure, ArityError):
            continue
        return c, m, t
    return g.typed()


def roundtrip_k_suite(seed: int, count: int, fuel: int = 64) -> tuple[int, list[str], int]:
    """For TF_k-typable M: ctx |- M = L(|M|) : T by check_equal.  Returns the
    number of cases, failures, and how many had labels differing from L(|M|)."""
    g = SigmaGen(seed)
    kern = Kernel(LABELLED_SIGMA_PI, fuel)
    fails, nontrivial, seen = [], 0, 0
    while seen < count:
        c, m, t = redex_label_term(g) if seen % 2 else g.typed()
        j = tfk.label_judgement(SIGMA_PI, Judgement(c, Typing(m, t)))
        lc, lm, lt = j.context, j.body.term, j.body.kind
        m2 = perturb_labels(g, lm)
        try:
            kern.check(lc, m2, lt)
        except CheckFailure:
            continue  # the perturbed term is not TF_k-typable; skip
        seen += 1
        back = tfk.label_entity(SIGMA_PI, c, None, tfk.erase_labels(m2))
        if not alpha_eq(back, m2):
            nontrivial += 1
        d = check_equal(LABELLED_SIGMA_PI, lc, m2, back, lt, fuel)
        if d is None:
            fails.append(f"#{seen}: no equality found for {m2}")
            continue
        rep = check_derivation(LABELLED_SIGMA_PI, d)
        if not rep.ok:
            fails.append(f"#{seen}: rejected: {rep.errors[0]}")
    return seen, fails, nontrivial


def commutation_suite(seed: int, count: int) -> tuple[int, list[str]]:
    """{L^K(F)/x} L_{G,x:K,D}(X) is L_{G,{F/x}D}({F/x}X)."""
    from props_check import admissibility_case

    g = SigmaGen(seed)
    fails, seen = [], 0
    while seen < count:
        gamma, x, k, _, delta, m, t, f = admissibility_case(g)
        if f is None:
            continue
        seen += 1
        full = gamma.extend(x, k) + delta
        lf = tfk.label_entity(SIGMA_PI, gamma, k, f)
        lm = tfk.label_entity(SIGMA_PI, full, None, m)
        left = instantiate(lf, x, lm)
        right = tfk.label_entity(SIGMA_PI, gamma + instantiate(f, x, delta), None, instantiate(f, x, m))
        if not alpha_eq(left, right):
            fails.append(f"#{seen}: {left} vs {right}")
    return seen, fails


def irrelevance_suite(seed: int, count: int) -> tuple[int, list[str]]:
    """Contexts that agree on the free variables give the same labeling."""
    g = SigmaGen(seed)
    fails = []
    for i in range(count):
        c, m, t = g.typed()
        extra = c
        for _ in range(g.rng.randint(1, 3)):
            extra = extra.extend(g.fresh("w"), kind(BaseKind(g.type_(extra, 1))))
        if not alpha_eq(tfk.label_entity(SIGMA_PI, c, None, m), tfk.label_entity(SIGMA_PI, extra, None, m)):
            fails.append(f"#{i}: {m}")
    return count, fails


def soundness_suite_k(seed: int, count: int) -> tuple[int, list[str]]:
    """L(J) is derivable in TF_k, and the erased derivation is a TF derivation."""
    g = SigmaGen(seed)
    kern = Kernel(LABELLED_SIGMA_PI)
    fails = []
    for i in range(count):
        c, m, t = g.typed()
        j = tfk.label_judgement(SIGMA_PI, Judgement(c, Typing(m, t)))
        try:
            d = kern.check(j.context, j.body.term, j.body.kind)
        except CheckFailure as e:
            fails.append(f"#{i}: L(J) not derivable: {e}")
            continue
        rep = tfk.check_k_derivation(LABELLED_SIGMA_PI, d)
        if not rep.ok:
            fails.append(f"#{i}: rejected: {rep.errors[0]}")
        back = tfk.erase_labels(d, LABELLED_SIGMA_PI)
        rep = check_derivation(SIGMA_PI, back)
        if not rep.ok:
            fails.append(f"#{i}: erased tree rejected: {rep.errors[0]}")
    return count, fails
