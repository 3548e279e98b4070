"""Seeded random generators for well-aritied TF syntax."""

from __future__ import annotations

import random

from tfkernel.arity import BASE, Arity, n_ary
from tfkernel.tf_core import Abstraction, Object, Symbol, const, var

UNARY = n_ary(1)
ARITIES_LE2 = [BASE, UNARY, n_ary(2), Arity((UNARY,)), Arity((UNARY, BASE)), Arity((BASE, UNARY))]


class TermGen:
    def __init__(self, seed: int, arities=ARITIES_LE2):
        self.rng = random.Random(seed)
        self.arities = list(arities)
        self.counter = 0

    def fresh_var(self, arity: Arity, stem: str = "v") -> Symbol:
        self.counter += 1
        return var(f"{stem}{self.counter}", arity)

    def signature(self, n_vars: int = 4, n_consts: int = 3) -> list[Symbol]:
        syms = [var("x", BASE), var("y", UNARY)]
        for i in range(n_vars):
            syms.append(var(f"u{i}", self.rng.choice(self.arities)))
        syms.append(const("c", BASE))
        for i in range(n_consts):
            syms.append(const(f"k{i}", self.rng.choice(self.arities)))
        return syms

    def obj(self, scope: list[Symbol], budget: int) -> Object:
        fits = [s for s in scope if len(s.arity.children) + 1 <= budget]
        if not fits:
            fits = [s for s in scope if not s.arity.children]
        head = self.rng.choice(fits)
        kids = head.arity.children
        rest = budget - 1
        args = []
        for i, a in enumerate(kids):
            share = max(1, rest // (len(kids) - i))
            share = self.rng.randint(1, share)
            args.append(self.abstraction(scope, a, share))
            rest -= share
        return Object(head, tuple(args))

    def abstraction(self, scope: list[Symbol], arity: Arity, budget: int) -> Abstraction:
        binders = tuple(self.fresh_var(a, "b") for a in arity.children)
        # reuse an enclosing name now and then to exercise shadowing and capture
        if binders and self.rng.random() < 0.3:
            same = [s for s in scope if s.is_var and s.arity == binders[0].arity and s.name not in {b.name for b in binders}]
            if same:
                binders = (same[0],) + binders[1:]
        inner = [s for s in scope if s.name not in {b.name for b in binders}] + list(binders)
        return Abstraction(binders, self.obj(inner, max(1, budget)))

    def obj_with(self, scope: list[Symbol], x: Symbol, budget: int) -> Object:
        """An object that mentions x at least once when that is possible."""
        for _ in range(20):
            m = self.obj(scope, budget)
            from tfkernel.tf_core import free_vars

            if x in free_vars(m):
                return m
        return m
