import random

import pytest
from common import GRID, EXAMPLE_PROGRAMS, b, leading_pair, program

from pipbound.bounds import CONST, Poly, asymptotic_class, eval_bound
from pipbound.driver import AnalysisConfig, analyze

CLASSES = {
    "leading": Poly(2),
    "preliminaries": Poly(1),
    "incorrectness": CONST,
    "concavity": CONST,
    "nondet_countdown": Poly(1),
}


@pytest.mark.parametrize("name", EXAMPLE_PROGRAMS)
def test_classes_and_rounds(name):
    r = analyze(program(name))
    assert r.cls == CLASSES[name]
    assert r.cls == asymptotic_class(r.total)
    assert r.converged and r.iterations <= 3


def test_injected_pair_gives_worked_bounds():
    r = analyze(program("leading"), pair=leading_pair())
    assert r.rt_e == {"g0": b("1"), "g1": b("2*x"), "g2": b("1"), "g3": b("6*x^2 + 2*y")}
    assert r.total == b("6*x^2 + 2*x + 2*y + 2")


def test_total_dominates_worked_total():
    r = analyze(program("leading"))
    ref = b("6*x^2 + 2*x + 2*y + 2")
    for x in GRID:
        for y in GRID:
            assert eval_bound(r.total, {"x": x, "y": y}) >= eval_bound(ref, {"x": x, "y": y})


def test_stops_when_all_finite():
    # every lifted bound is already finite, so no round runs
    r = analyze(program("incorrectness"))
    assert r.iterations == 0 and r.converged


def test_rounds_stop_once_finite():
    r = analyze(program("leading"), AnalysisConfig(max_rounds=10))
    assert all(v.is_finite for v in r.rt_e.values())
    assert r.iterations <= 3


@pytest.mark.parametrize("name", EXAMPLE_PROGRAMS)
def test_deterministic(name):
    a, c = analyze(program(name)).to_json(), analyze(program(name)).to_json()
    a.pop("wall_time"), c.pop("wall_time")
    assert a == c


def test_timeout_keeps_lifted_bounds():
    r = analyze(program("leading"), AnalysisConfig(timeout=0.0))
    assert r.timed_out
    assert r.iterations == 0
    assert r.total.is_inf


def test_empty_program_total_zero():
    r = analyze(program("empty"))
    assert r.total == b("0")
    assert r.cls == CONST
    assert r.removed == ["g0"]


def test_cost_weighting():
    from pipbound.parser import parse_program

    p = parse_program("vars x\nstart l0\nl0 -> l1 {3}\nl1 -> l1(x = x - 1) :|: x > 0 {1/2}\n")
    r = analyze(p)
    assert r.total == b("3") + r.rt_e["g1"] * b("1/2")


@pytest.mark.parametrize("name", EXAMPLE_PROGRAMS)
def test_rounds_are_monotone(name):
    """Round k+1 bounds never exceed round k bounds on sampled states."""
    rng = random.Random(name)
    prev = None
    for k in range(0, 5):
        r = analyze(program(name), AnalysisConfig(max_rounds=k))
        if prev is not None:
            for _ in range(30):
                s = {x: rng.randint(0, 10) for x in r.program.pv}
                for gid, bound in r.rt_e.items():
                    assert eval_bound(bound, s) <= eval_bound(prev.rt_e[gid], s), (k, gid, s)
                for a, bound in r.sz_e.items():
                    assert eval_bound(bound, s) <= eval_bound(prev.sz_e[a], s), (k, a, s)
        prev = r


def test_no_invariants_flag():
    with_inv = analyze(program("incorrectness"))
    without = analyze(program("incorrectness"), AnalysisConfig(no_invariants=True))
    assert with_inv.program != without.program
