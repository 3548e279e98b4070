from hypothesis import given
from hypothesis import strategies as st

from tfkernel.arity import BASE, Arity, concat, is_subarity, n_ary, order_of, parse_arity

arities = st.recursive(st.just(BASE), lambda kids: st.lists(kids, min_size=1, max_size=3).map(lambda ks: Arity(tuple(ks))), max_leaves=8)

U = n_ary(1)


def test_concat_examples():
    assert concat(U, U) == n_ary(2)
    a = Arity((U, BASE))
    assert concat(BASE, a) == a
    # flatten the child sequences by hand
    left, right = Arity((U,)), n_ary(2)
    assert concat(left, right).children == (U, BASE, BASE)
    assert str(concat(left, right)) == "((0),0,0)"


def test_order_examples():
    assert order_of(BASE) == 0
    assert order_of(n_ary(2)) == 1
    assert order_of(Arity((U, BASE))) == 2


def test_subarity_examples():
    assert is_subarity(BASE, U)
    assert is_subarity(U, U)
    # subtrees of (0) are exactly (0) and 0
    assert not is_subarity(n_ary(2), U)


def test_display():
    assert str(BASE) == "0"
    assert str(n_ary(3)) == "(0,0,0)"
    assert parse_arity("((0),0)") == Arity((U, BASE))


def _manual_order(a):
    stack, best = [(a, 0)], 0
    while stack:
        node, depth = stack.pop()
        best = max(best, depth)
        stack.extend((c, depth + 1) for c in node.children)
    return best


@given(arities)
def test_order_matches_depth(a):
    assert order_of(a) == _manual_order(a)
    for c in a.children:
        assert order_of(c) < order_of(a)


@given(arities, arities)
def test_concat_order(a, b):
    c = concat(a, b)
    assert c.children == a.children + b.children
    if a.children and b.children:
        assert order_of(c) == max(order_of(a), order_of(b))
    assert concat(BASE, a) == a and concat(a, BASE) == a


@given(arities, arities, arities)
def test_subarity_order_laws(a, b, c):
    assert is_subarity(a, a)
    if is_subarity(a, b) and is_subarity(b, c):
        assert is_subarity(a, c)
    if is_subarity(a, b) and is_subarity(b, a):
        assert a == b


@given(arities)
def test_display_roundtrip(a):
    assert parse_arity(str(a)) == a
