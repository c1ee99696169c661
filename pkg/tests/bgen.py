"""Random bound expressions and polynomials for property tests."""

from __future__ import annotations

import random
from fractions import Fraction

from pipbound.arith import Polynomial
from pipbound.bounds import RAW_INF, Exp, Prod, Sum, simplify

VARS = ("x", "y", "z")
CONSTS = (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3), Fraction(7, 3))


def _int_expr(rng: random.Random, depth: int):
    """Exponent with integer values at integer states."""
    if depth == 0 or rng.random() < 0.4:
        return rng.choice(VARS) if rng.random() < 0.7 else rng.randint(0, 2)
    node = Sum if rng.random() < 0.6 else Prod
    return node(tuple(_int_expr(rng, depth - 1) for _ in range(2)))


def raw_expr(rng: random.Random, depth: int = 3, inf: bool = True, exp: bool = True):
    if depth == 0 or rng.random() < 0.3:
        r = rng.random()
        if inf and r < 0.04:
            return RAW_INF
        if r < 0.6:
            return rng.choice(VARS)
        return rng.choice(CONSTS)
    r = rng.random()
    if exp and r < 0.12:
        return Exp(rng.choice((Fraction(2), Fraction(3, 2), Fraction(1))), _int_expr(rng, 2))
    node = Sum if r < 0.6 else Prod
    return node(tuple(raw_expr(rng, depth - 1, inf, exp) for _ in range(rng.randint(2, 3))))


def bound(rng: random.Random, **kw):
    return simplify(raw_expr(rng, **kw))


def linear_bound(rng: random.Random):
    return simplify(Sum(tuple([rng.choice(CONSTS)] + [Prod((rng.choice(CONSTS), v)) for v in VARS
                                                      if rng.random() < 0.7])))


def polynomial(rng: random.Random, terms: int = 4, degree: int = 2) -> Polynomial:
    out = Polynomial()
    for _ in range(rng.randint(0, terms)):
        m = Polynomial.const(Fraction(rng.randint(-6, 6), rng.choice((1, 1, 2, 3))))
        for v in VARS:
            m = m * Polynomial.var(v) ** rng.randint(0, degree)
        out = out + m
    return out


def state(rng: random.Random, lo: int = -5, hi: int = 5) -> dict[str, int]:
    return {v: rng.randint(lo, hi) for v in VARS}


def larger_state(rng: random.Random, s: dict[str, int]) -> dict[str, int]:
    """A state with componentwise larger absolute values."""
    return {v: (abs(x) + rng.randint(0, 4)) * rng.choice((1, -1)) for v, x in s.items()}


def rational_point(rng: random.Random) -> dict[str, Fraction]:
    return {v: Fraction(rng.randint(0, 40), rng.randint(1, 6)) for v in VARS}
