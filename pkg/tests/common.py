"""Shared helpers for the test suite."""

from __future__ import annotations

from pathlib import Path

from fractions import Fraction

from pipbound.bounds import INF, Bound, is_linear, overapprox
from pipbound.exprt import lift
from pipbound.expsize import change_bounds, improve_size_trivial
from pipbound.nonprob import BoundPair, nonprob_bounds
from pipbound.parser import load_program, parse_poly
from pipbound.pip import GRV, PIP, abstract_nonprob, entry
from pipbound.preprocess import preprocess
from pipbound.ranking import PLRF

ROOT = Path(__file__).resolve().parents[1]
PROGRAMS = ROOT / "programs"
EXAMPLE_PROGRAMS = ("leading", "preliminaries", "incorrectness", "concavity", "nondet_countdown")
GRID = (0, 1, 3, 10)


def program(name: str) -> PIP:
    return load_program(PROGRAMS / f"{name}.pip")


def b(text: str) -> Bound:
    """A bound from polynomial text with nonnegative coefficients, or ``inf``."""
    return INF if text == "inf" else overapprox(parse_poly(text))


def leading_pair() -> BoundPair:
    """Non-probabilistic pair for the leading example with the reference values."""
    rt = {"t0": b("1"), "t1": b("x"), "t2": INF, "t3": b("1"), "t4": INF}
    sz = {}
    for t in ("t0", "t1", "t2", "t3", "t4"):
        sz[(t, "x")] = b("x") if t in ("t0", "t1", "t2") else b("3*x")
        sz[(t, "y")] = b("y") if t == "t0" else INF
    return BoundPair(rt, sz)


def synthesized_plrfs(p: PIP):
    """Every PLRF the analysis would try on ``p``, plus the plain first-feasible search."""
    from pipbound.exprt import plrf_cache
    from pipbound.ranking import candidate_gtni, synthesize_plrf

    cache = plrf_cache(p)
    for g in p.general_transitions:
        yield from ((g.id, r) for r in cache.functions(g.id))
        for ni in candidate_gtni(p, g.id):
            r = synthesize_plrf(p, {g.id}, ni)
            if r is not None:
                yield g.id, r


def expected_entry_runtime(p, ebp, r) -> Bound:
    """Deliberately unsound: weights every entry by its expected runtime."""
    total = Bound.const(0)
    for loc, ets in entry(p, r.gt_ni).items():
        rank = overapprox(r.at(loc))
        for h in ets:
            total = total + ebp.runtime(h.id) * rank.substitute({x: ebp.size(h.id, loc, x) for x in rank.vars()})
    return total


def incorrectness_setup():
    """Exact expectations: g2 runs twice and y is 2 on average when entering l3."""
    p = preprocess(program("incorrectness"))
    bp = nonprob_bounds(abstract_nonprob(p))
    ebp = lift(bp, p)
    ebp.rt_e["g2"] = Bound.const(2)
    ebp.sz_e[GRV("g2", "l3", "y")] = Bound.const(2)
    r = PLRF({"l3": parse_poly("y")}, frozenset({"g3"}), frozenset({"g3"}))
    return p, bp, ebp, r


TRUE_G3 = Fraction(14, 3)


def concavity_bound():
    p = program("concavity")
    bp = nonprob_bounds(abstract_nonprob(p))
    assert bp.size("t0", "x") == b("x + 15")
    ebp = lift(bp, p)
    ebp.sz_e[GRV("g0", "l1", "x")] = b("x + 8")
    ch = change_bounds(p, bp)
    alpha = GRV("g1", "l2", "x")
    assert ch[alpha] == b("x^2 + x") and not is_linear(ch[alpha])
    return improve_size_trivial(p, bp, ebp, ch, alpha)
