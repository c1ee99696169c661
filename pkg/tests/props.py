"""Bound-algebra properties as seed-driven checks, shared by hypothesis tests and acceptance loops."""

from __future__ import annotations

import random

import bgen

from pipbound.bounds import eval_bound, is_linear, overapprox, simplify, substitute_bound


def overapprox_dominates(seed: int) -> bool:
    rng = random.Random(seed)
    p = bgen.polynomial(rng)
    s = bgen.state(rng)
    return eval_bound(overapprox(p), s) >= abs(p.evaluate(s))


def weakly_monotone(seed: int) -> bool:
    rng = random.Random(seed)
    bd = bgen.bound(rng)
    s = bgen.state(rng, -3, 3)
    return eval_bound(bd, s) <= eval_bound(bd, bgen.larger_state(rng, s))


def substitution_monotone(seed: int) -> bool:
    rng = random.Random(seed)
    bd = bgen.bound(rng, depth=2)
    s1 = {v: bgen.bound(rng, depth=1, exp=False) for v in bgen.VARS}
    s2 = {v: s1[v] + bgen.bound(rng, depth=1, exp=False) for v in bgen.VARS}
    s = bgen.state(rng, -3, 3)
    return eval_bound(substitute_bound(bd, s1), s) <= eval_bound(substitute_bound(bd, s2), s)


def simplify_preserves_value(seed: int) -> bool:
    rng = random.Random(seed)
    e = bgen.raw_expr(rng)
    s = bgen.state(rng, -3, 3)
    return eval_bound(simplify(e), s) == eval_bound(e, s)


def linear_is_midpoint_concave(seed: int) -> bool:
    rng = random.Random(seed)
    bd = bgen.linear_bound(rng)
    w, w2 = bgen.rational_point(rng), bgen.rational_point(rng)
    mid = {v: (w[v] + w2[v]) / 2 for v in w}
    return is_linear(bd) and eval_bound(bd, mid) >= (eval_bound(bd, w) + eval_bound(bd, w2)) / 2


def concavity_decides_linearity(seed: int) -> bool:
    """On the diagonal 0, 1, 2 a finite bound is midpoint concave iff it is linear."""
    rng = random.Random(seed)
    bd = bgen.bound(rng, inf=False)
    zero = {v: 0 for v in bgen.VARS}
    two = {v: 2 for v in bgen.VARS}
    one = {v: 1 for v in bgen.VARS}
    concave = eval_bound(bd, one) >= (eval_bound(bd, zero) + eval_bound(bd, two)) / 2
    return concave == is_linear(bd)
