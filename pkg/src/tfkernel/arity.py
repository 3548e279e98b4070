"""Arities: finite trees that classify how a symbol takes its arguments."""

from __future__ import annotations

import dataclasses
import functools


@dataclasses.dataclass(frozen=True)
class Arity:
    children: tuple[Arity, ...] = ()

    def __str__(self) -> str:
        if not self.children:
            return "0"
        return "(" + ",".join(str(c) for c in self.children) + ")"

    def __repr__(self) -> str:
        return f"Arity<{self}>"

    def __len__(self) -> int:
        return len(self.children)


BASE = Arity()


def n_ary(n: int) -> Arity:
    """The first-order arity (0,...,0) with n entries."""
    return Arity((BASE,) * n)


def concat(a: Arity, b: Arity) -> Arity:
    return Arity(a.children + b.children)


@functools.lru_cache(maxsize=None)
def order_of(a: Arity) -> int:
    if not a.children:
        return 0
    return 1 + max(order_of(c) for c in a.children)


def subarities(a: Arity) -> set[Arity]:
    """Every arity occurring inside a, including a itself."""
    found = {a}
    for c in a.children:
        found |= subarities(c)
    # the base arity occurs in every arity as a leaf
    found.add(BASE)
    return found


def is_subarity(a: Arity, b: Arity) -> bool:
    if a == b or a == BASE:
        return True
    return any(is_subarity(a, c) for c in b.children)


def is_proper_subarity(a: Arity, b: Arity) -> bool:
    return a != b and is_subarity(a, b)


def parse_arity(text: str) -> Arity:
    """Read the display syntax back: `0` or `(a1,...,an)`."""
    pos = 0

    def go() -> Arity:
        nonlocal pos
        if text[pos] == "0":
            pos += 1
            return BASE
        if text[pos] != "(":
            raise ValueError(f"bad arity at {pos}: {text!r}")
        pos += 1
        kids = [go()]
        while text[pos] == ",":
            pos += 1
            kids.append(go())
        if text[pos] != ")":
            raise ValueError(f"bad arity at {pos}: {text!r}")
        pos += 1
        return Arity(tuple(kids))

    text = text.replace(" ", "")
    result = go()
    if pos != len(text):
        raise ValueError(f"trailing input in arity {text!r}")
    return result
