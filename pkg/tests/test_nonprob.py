import random

import pytest
from common import GRID, EXAMPLE_PROGRAMS, program
from progen import random_pip

from pipbound.bounds import INF, Bound, Poly, asymptotic_class, eval_bound, prefer
from pipbound.nonprob import nonprob_bounds, temp_bound
from pipbound.parser import parse_poly, parse_program
from pipbound.pip import GRV, abstract_nonprob
from pipbound.preprocess import preprocess
from pipbound.sim import RandomEnabled, estimate


@pytest.fixture(scope="module")
def leading_bp():
    return nonprob_bounds(abstract_nonprob(program("leading")))


def test_leading_runtimes(leading_bp):
    assert leading_bp.runtime("t0") == Bound.const(1)
    assert leading_bp.runtime("t3") == Bound.const(1)
    assert leading_bp.runtime("t2") == INF
    assert asymptotic_class(leading_bp.runtime("t1")) == Poly(1)


def test_leading_sizes(leading_bp):
    for t in ("t0", "t1", "t2", "t3", "t4"):
        assert leading_bp.size(t, "x").is_finite
    assert leading_bp.size("t1", "y").is_inf


def test_identity_from_initial():
    p = abstract_nonprob(parse_program("vars x\nstart l0\nl0 -> l1\n"))
    assert nonprob_bounds(p).size("t0", "x") == Bound.var("x")


def test_temp_bound_from_guard():
    atoms = [parse_poly("u - 1"), parse_poly("x - u")]
    assert temp_bound(atoms, "u", ("x",)) == Bound.var("x")
    assert temp_bound([parse_poly("u - 1")], "u", ("x",)) == INF


def _key(b):
    return (asymptotic_class(b), b.monomial_count(), b.coefficient_sum())


@pytest.mark.parametrize("name", EXAMPLE_PROGRAMS)
def test_refinement_is_monotone(name):
    p = abstract_nonprob(preprocess(program(name)))
    prev = None
    for k in range(1, 2 * len(p.general_transitions) + 1):
        bp = nonprob_bounds(p, max_rounds=k)
        if prev is not None:
            for tid, b in bp.rt.items():
                assert prefer(prev.runtime(tid), b) == b, (k, tid)
            for node, b in bp.sz.items():
                assert prefer(prev.size(*node), b) == b, (k, node)
        prev = bp


def _check_sound(p_abs, bp, s0, seed, cap=10**4):
    st = estimate(p_abs, s0, RandomEnabled(seed, box=10), 10**4, step_cap=cap, seed=seed)
    for t in p_abs.transitions():
        rt = eval_bound(bp.runtime(t.id), s0)
        assert st.rt_max[t.id] <= rt, (t.id, s0, st.rt_max[t.id], str(bp.runtime(t.id)))
        for x in p_abs.pv:
            sz = eval_bound(bp.size(t.id, x), s0)
            seen = st.size_max[GRV(t.id, t.target, x)]
            assert seen <= sz, (t.id, x, s0, seen, str(bp.size(t.id, x)))


@pytest.mark.parametrize("name", EXAMPLE_PROGRAMS)
def test_sound_against_simulation(name):
    p_abs = abstract_nonprob(preprocess(program(name)))
    bp = nonprob_bounds(p_abs)
    rng = random.Random(name)
    for i in range(3):
        s0 = {x: rng.choice(GRID) for x in p_abs.pv}
        _check_sound(p_abs, bp, s0, i)


@pytest.mark.parametrize("seed", range(20))
def test_sound_on_random_programs(seed):
    p_abs = abstract_nonprob(preprocess(random_pip(seed)))
    bp = nonprob_bounds(p_abs)
    rng = random.Random(seed)
    s0 = {x: rng.randint(-3, 3) for x in p_abs.pv}
    _check_sound(p_abs, bp, s0, seed, cap=300)
