"""Program pruning and interval invariants."""

from __future__ import annotations

import math
from dataclasses import replace
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .arith import Constraint, Polynomial
from .lp import LinExpr, LPProblem, lp_feasible
from .pip import (
    PIP,
    Bernoulli,
    Binomial,
    Geometric,
    GeneralTransition,
    Hypergeometric,
    Uniform,
    is_dist,
)

Interval = tuple[Optional[Fraction], Optional[Fraction]]  # None means unbounded
TOP: Interval = (None, None)
WIDEN_AFTER = 3


def guard_feasible(c: Constraint) -> bool:
    """Rational feasibility of the linear atoms of ``c``."""
    lp = LPProblem()
    for a in c.atoms:
        lp.geq(LinExpr({v: a.linear_coeff(v) for v in a.vars()}, a.constant_term))
    return lp_feasible(lp) is not None


def preprocess(p: PIP, invariants: bool = True) -> PIP:
    p = _prune(p)
    if invariants and p.general_transitions:
        p = _prune(add_interval_invariants(p))
    return p


def _prune(p: PIP) -> PIP:
    gts: list[GeneralTransition] = []
    for g in p.general_transitions:
        members = tuple(t for t in g.members if t.prob != 0)
        if members and guard_feasible(g.guard):
            gts.append(GeneralTransition(g.id, members))
    reach = {p.initial}
    changed = True
    while changed:
        changed = False
        for g in gts:
            if g.source in reach:
                for loc in g.targets():
                    if loc not in reach:
                        reach.add(loc)
                        changed = True
    gts = [g for g in gts if g.source in reach]
    locs = [loc for loc in p.locations if loc in reach]
    return PIP(p.pv, tuple(locs), tuple(gts), p.initial)


# interval arithmetic -------------------------------------------------------------------
def _add(a: Interval, b: Interval) -> Interval:
    lo = None if a[0] is None or b[0] is None else a[0] + b[0]
    hi = None if a[1] is None or b[1] is None else a[1] + b[1]
    return lo, hi


def _scale(a: Interval, c: Fraction) -> Interval:
    if c == 0:
        return (Fraction(0), Fraction(0))
    lo, hi = a
    if c > 0:
        return (None if lo is None else lo * c, None if hi is None else hi * c)
    return (None if hi is None else hi * c, None if lo is None else lo * c)


def _mul(a: Interval, b: Interval) -> Interval:
    ends = []
    for x in a:
        for y in b:
            if x is None or y is None:
                other = y if x is None else x
                if other is None:
                    ends.append(None)
                elif other == 0:
                    ends.append(Fraction(0))
                else:
                    ends.append(None)
            else:
                ends.append(x * y)
    if any(e is None for e in ends):
        # an unbounded factor: keep only a sign-based bound when both factors are nonnegative
        if a[0] is not None and a[0] >= 0 and b[0] is not None and b[0] >= 0:
            return (a[0] * b[0], None)
        return TOP
    return (min(ends), max(ends))


def _poly_interval(p: Polynomial, env: Mapping[str, Interval]) -> Interval:
    total: Interval = (Fraction(0), Fraction(0))
    for m, c in p.terms.items():
        term: Interval = (Fraction(1), Fraction(1))
        for v, k in m:
            iv = env.get(v, TOP)
            if k % 2 == 0 and k > 0:
                # even powers are nonnegative
                mag = _mul(iv, iv)
                base = (max(Fraction(0), mag[0]) if mag[0] is not None else Fraction(0), mag[1])
                for _ in range(k // 2 - 1):
                    base = _mul(base, mag)
                term = _mul(term, base)
            else:
                for _ in range(k):
                    term = _mul(term, iv)
        total = _add(total, _scale(term, c))
    return total


def _meet(a: Interval, b: Interval) -> Interval:
    lo = a[0] if b[0] is None else b[0] if a[0] is None else max(a[0], b[0])
    hi = a[1] if b[1] is None else b[1] if a[1] is None else min(a[1], b[1])
    return lo, hi


def _join(a: Interval, b: Interval) -> Interval:
    lo = None if a[0] is None or b[0] is None else min(a[0], b[0])
    hi = None if a[1] is None or b[1] is None else max(a[1], b[1])
    return lo, hi


def _empty(iv: Interval) -> bool:
    return iv[0] is not None and iv[1] is not None and iv[0] > iv[1]


def _refine(atoms: Sequence[Polynomial], env: dict[str, Interval]) -> dict[str, Interval] | None:
    """Propagate linear atoms into variable intervals (two passes); None if empty."""
    env = dict(env)
    for _ in range(2):
        for a in atoms:
            for v in a.vars():
                c = a.linear_coeff(v)
                rest = a - Polynomial.var(v) * c
                r_lo, r_hi = _poly_interval(rest, env)
                # c*v + rest >= 0
                if c > 0 and r_hi is not None:
                    bound = Fraction(math.ceil(-r_hi / c))
                    env[v] = _meet(env.get(v, TOP), (bound, None))
                elif c < 0 and r_hi is not None:
                    bound = Fraction(math.floor(r_hi / -c))
                    env[v] = _meet(env.get(v, TOP), (None, bound))
                if _empty(env.get(v, TOP)):
                    return None
    return env


def _support(d, env: Mapping[str, Interval]) -> Interval:
    if isinstance(d, Bernoulli):
        return (Fraction(0), Fraction(1))
    if isinstance(d, Geometric):
        return (Fraction(1), None)
    if isinstance(d, Uniform):
        return (_poly_interval(d.a, env)[0], _poly_interval(d.b, env)[1])
    if isinstance(d, (Binomial, Hypergeometric)):
        return (Fraction(0), _poly_interval(d.n, env)[1])
    raise TypeError(d)


def interval_invariants(p: PIP) -> dict[str, dict[str, Interval]]:
    """Per-location intervals for program variables, by widening fixpoint iteration."""
    state: dict[str, dict[str, Interval] | None] = {loc: None for loc in p.locations}
    state[p.initial] = {x: TOP for x in p.pv}
    visits = {loc: 0 for loc in p.locations}
    work = [p.initial]
    while work:
        loc = work.pop(0)
        env = state[loc]
        if env is None:
            continue
        for g in p.general_transitions:
            if g.source != loc:
                continue
            pre = _refine(g.guard.atoms, env)
            if pre is None:
                continue
            for t in g.members:
                post: dict[str, Interval] = {}
                for x in p.pv:
                    rhs = t.rhs(x)
                    if is_dist(rhs):
                        post[x] = _add(pre.get(x, TOP), _support(rhs, pre))
                    else:
                        post[x] = _poly_interval(rhs, pre)
                old = state[t.target]
                if old is None:
                    new = post
                else:
                    new = {x: _join(old[x], post[x]) for x in p.pv}
                    if visits[t.target] >= WIDEN_AFTER:
                        new = {x: _widen(old[x], new[x]) for x in p.pv}
                if new != old:
                    state[t.target] = new
                    visits[t.target] += 1
                    if t.target not in work:
                        work.append(t.target)
    return {loc: env for loc, env in state.items() if env is not None}


def _widen(old: Interval, new: Interval) -> Interval:
    lo = old[0] if old[0] is not None and new[0] is not None and new[0] >= old[0] else None
    hi = old[1] if old[1] is not None and new[1] is not None and new[1] <= old[1] else None
    return lo, hi


def add_interval_invariants(p: PIP) -> PIP:
    inv = interval_invariants(p)
    gts = []
    for g in p.general_transitions:
        env = inv.get(g.source, {})
        atoms = []
        for x in p.pv:
            lo, hi = env.get(x, TOP)
            if lo is not None:
                atoms.append(Polynomial.var(x) - math.ceil(lo))
            if hi is not None:
                atoms.append(math.floor(hi) - Polynomial.var(x))
        guard = g.guard.conjoin(atoms)
        gts.append(GeneralTransition(g.id, tuple(replace(t, guard=guard) for t in g.members)))
    return PIP(p.pv, p.locations, tuple(gts), p.initial)
