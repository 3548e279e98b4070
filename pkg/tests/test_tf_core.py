import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import lambda_oracle as lo
from props import check_instantiation_lemmas

from tfkernel.arity import BASE, Arity, n_ary
from tfkernel.tf_core import (
    Abstraction,
    ArityError,
    Object,
    alpha_eq,
    const,
    employ,
    eta_long,
    eta_long_at,
    free_vars,
    instantiate,
    instantiate_seq,
    var,
    abstraction_of,
)

U = n_ary(1)


def o(head, *args):
    return Object(head, tuple(a if isinstance(a, Abstraction) else abstraction_of(a) for a in args))


def lam(binders, body):
    return Abstraction(tuple(binders), body)


x, y, t, h, a0 = var("x"), var("y"), var("t"), var("h", U), const("a")
f, g = var("f", U), var("g", U)


def test_free_vars_examples():
    assert free_vars(o(f, o(x))) == {f, x}
    assert free_vars(lam([x], o(g, o(x)))) == {g}
    # {([t]a)/x} on x[y], with x unary: the oracle collects {y}? x[y] loses y
    xu = var("x", U)
    res = instantiate(lam([t], o(a0)), xu, o(xu, o(y)))
    assert free_vars(res) == lo.oracle_free_vars(res) == set()
    res = instantiate(lam([t], o(y)), xu, o(xu, o(x)))
    assert free_vars(res) == {y}


def test_alpha_examples():
    assert alpha_eq(lam([x], o(f, o(x))), lam([y], o(f, o(y))))
    assert not alpha_eq(lam([x], o(f, o(x))), lam([x], o(g, o(x))))
    hh = const("hh", n_ary(2))
    left = lam([x, y], o(hh, o(x), o(y)))
    right = lam([y, x], o(hh, o(y), o(x)))
    assert alpha_eq(left, right)
    assert not alpha_eq(left, lam([y, x], o(hh, o(x), o(y))))


def test_eta_long_examples():
    z = var("z")
    assert eta_long(z) == Abstraction((), o(z))
    assert alpha_eq(eta_long(f), lam([x], o(f, o(x))))
    G = var("G", Arity((U,)))
    want = lam([h], o(G, lam([x], o(h, o(x)))))
    assert alpha_eq(eta_long(G), want)
    assert alpha_eq(eta_long(G), lo.oracle_eta(G))


def test_instantiate_examples():
    b, c = const("b"), const("c", U)
    assert instantiate(abstraction_of(o(a0)), x, o(c, o(b))) == o(c, o(b))
    assert alpha_eq(instantiate(lam([t], o(t)), f, o(f, o(a0))), o(a0))
    bb = const("bb", U)
    body = eta_long(f)
    assert alpha_eq(instantiate(lam([t], o(bb, o(t))), f, body), lam([y], o(bb, o(y))))


def test_instantiate_rejects_arity_mismatch():
    with pytest.raises(ArityError):
        instantiate(lam([t], o(t)), x, o(x))


def test_employ_examples():
    assert alpha_eq(employ(lam([x], o(x)), abstraction_of(o(a0))), abstraction_of(o(a0)))
    assert alpha_eq(employ(lam([y], o(f, o(y))), abstraction_of(o(a0))), abstraction_of(o(f, o(a0))))
    gc = const("gc", U)
    F = lam([h], o(h, o(a0)))
    G = lam([t], o(gc, o(t)))
    assert alpha_eq(employ(F, G), abstraction_of(o(gc, o(a0))))
    assert alpha_eq(employ(F, G), lo.oracle_employ(F, G))
    with pytest.raises(ArityError):
        employ(F, abstraction_of(o(a0)))


def test_instantiate_seq_examples():
    A, B = var("A"), var("B", U)
    cc = const("cc", U)
    m = o(B, o(A))
    assert instantiate_seq((), (), m) == m
    res = instantiate_seq((abstraction_of(o(a0)), lam([x], o(cc, o(x)))), (A, B), m)
    assert alpha_eq(res, o(cc, o(a0)))
    assert alpha_eq(res, lo.oracle_simultaneous((abstraction_of(o(a0)), lam([x], o(cc, o(x)))), (A, B), m))
    assert alpha_eq(instantiate_seq((eta_long(B),), (B,), m), m)
    with pytest.raises(ArityError):
        instantiate_seq((abstraction_of(o(a0)),), (A, B), m)


def test_capture_is_avoided():
    # {y/x}[y]k[x, y] must rename the binder
    k = const("k", n_ary(2))
    m = lam([y], o(k, o(x), o(y)))
    res = instantiate(abstraction_of(o(y)), x, m)
    assert res.binders[0].name == "y'"
    assert alpha_eq(res, lo.oracle_instantiate_abs(abstraction_of(o(y)), x, m))


def test_eta_long_at_renames_clashing_binders():
    from tfkernel.tf_core import KTYPE, Context, ProductKind, TYPE

    z = var("z", U)
    K = ProductKind(Context(((var("z"), KTYPE),)), TYPE)
    e = eta_long_at(z, K)
    assert e.binders[0].name != "z"
    assert alpha_eq(e.body, Object(z, (abstraction_of(Object(e.binders[0])),)))


def test_lemmas_small_batch():
    seen, fails = check_instantiation_lemmas(seed=7, count=150)
    assert seen == 150
    assert fails == []


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_lemmas_hypothesis_seeds(seed):
    _, fails = check_instantiation_lemmas(seed=seed, count=3)
    assert fails == []
