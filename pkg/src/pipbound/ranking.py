"""Linear ranking functions: Farkas encoding, synthesis, verification, candidates.

Two flavours share the encoder:

* ``synthesize_plrf`` builds probabilistic linear ranking functions for
  general transitions. Non-increase and decrease are stated in expectation;
  boundedness asks every post-state of a member to have a nonnegative value.
  Members of a deterministic singleton general transition outside the
  decreasing set are exempt, since their successor is fixed and the sign
  condition holds trivially.
* ``synthesize_lrf`` builds classic ranking functions for the
  non-probabilistic abstraction: decreasing transitions need ``r >= 1``
  before they fire.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .arith import ONE, Monomial, Polynomial, eval_poly, substitute_poly
from .graphs import scc_map
from .lp import LinExpr, LPProblem, lp_feasible
from .pip import (
    PIP,
    GeneralTransition,
    SimulationFault,
    Transition,
    dist_expected,
    dist_sample,
    dist_support,
    is_dist,
    location_graph,
)

TPoly = dict[Monomial, LinExpr]


@dataclass(frozen=True)
class PLRF:
    r: Mapping[str, Polynomial]
    gt_decr: frozenset[str]
    gt_ni: frozenset[str]

    def at(self, loc: str) -> Polynomial:
        return self.r.get(loc, Polynomial())

    def __str__(self) -> str:
        return ", ".join(f"r({loc}) = {poly}" for loc, poly in sorted(self.r.items()))


# template polynomials ---------------------------------------------------------------
def _tp_add(a: TPoly, b: TPoly, scale: Fraction | int = 1) -> TPoly:
    out = dict(a)
    for m, e in b.items():
        out[m] = out.get(m, LinExpr()) + e * scale
    return out


def _tp_from_poly(p: Polynomial, coeff: LinExpr) -> TPoly:
    return {m: coeff * c for m, c in p.terms.items()}


class _Template:
    """Unknown linear ranking values per location."""

    def __init__(self, lp: LPProblem, pv: Sequence[str], locs: Iterable[str], constant_at: Iterable[str] = ()):
        self.pv = tuple(pv)
        self.locs = list(locs)
        const_locs = set(constant_at)
        self.unknowns: dict[str, dict[str, LinExpr]] = {}
        for loc in self.locs:
            coeffs = {"1": lp.add_unknown(f"r[{loc}].1")}
            if loc not in const_locs:
                for x in self.pv:
                    coeffs[x] = lp.add_unknown(f"r[{loc}].{x}")
            self.unknowns[loc] = coeffs

    def after(self, loc: str, sigma: Mapping[str, Polynomial]) -> TPoly:
        """Template ``r(loc)`` with every program variable replaced via ``sigma``."""
        coeffs = self.unknowns.get(loc)
        if coeffs is None:
            return {}
        out: TPoly = {ONE: coeffs["1"]}
        for x in self.pv:
            if x in coeffs:
                image = sigma.get(x, Polynomial.var(x))
                out = _tp_add(out, _tp_from_poly(image, coeffs[x]))
        return out

    def at(self, loc: str) -> TPoly:
        return self.after(loc, {})

    def instantiate(self, values: Mapping[str, Fraction]) -> dict[str, Polynomial]:
        out = {}
        for loc, coeffs in self.unknowns.items():
            terms = {}
            for x, e in coeffs.items():
                terms[ONE if x == "1" else ((x, 1),)] = e.evaluate(values)
            out[loc] = Polynomial(terms)
        return out

    def weights(self, locs: Iterable[str]) -> dict[str, Fraction]:
        w: dict[str, Fraction] = {}
        for loc in locs:
            for e in self.unknowns.get(loc, {}).values():
                for u in e.coeffs:
                    w[u] = Fraction(1)
        return w


def _expected_sigma(t: Transition) -> dict[str, Polynomial]:
    out = {}
    for x, rhs in t.update:
        out[x] = Polynomial.var(x) + dist_expected(rhs) if is_dist(rhs) else rhs
    return out


def _sample_sigma(t: Transition) -> tuple[dict[str, Polynomial], list[Polynomial]]:
    """Post-state map with a fresh variable per sampled update, plus its support atoms."""
    out, support = {}, []
    for x, rhs in t.update:
        if is_dist(rhs):
            u = f"_s_{t.id}_{x}"
            out[x] = Polynomial.var(x) + Polynomial.var(u)
            support += [a for a in dist_support(rhs, u) if a.is_linear()]
        else:
            out[x] = rhs
    return out, support


def expected_post(r: PLRF | Mapping[str, Polynomial], g: GeneralTransition) -> Polynomial:
    """Symbolic expected ranking value after executing ``g``."""
    at = r.at if isinstance(r, PLRF) else (lambda loc: r.get(loc, Polynomial()))
    out = Polynomial()
    for t in g.members:
        out = out + substitute_poly(at(t.target), _expected_sigma(t)) * t.prob
    return out


# Farkas encoding --------------------------------------------------------------------
_fresh = [0]


def farkas_entail(premise: Sequence[Polynomial], conclusion: TPoly | Polynomial, tag: str = "") -> LPProblem:
    """Constraints stating ``premise (atoms p >= 0) implies conclusion >= 0``.

    Nonnegative multipliers ``lam_j`` must reproduce every non-constant
    coefficient of the conclusion and leave a nonnegative constant slack.
    Nonlinear monomials of the conclusion must vanish.
    """
    if isinstance(conclusion, Polynomial):
        conclusion = {m: LinExpr(const=c) for m, c in conclusion.terms.items()}
    if not tag:
        _fresh[0] += 1
        tag = f"f{_fresh[0]}"
    lp = LPProblem()
    lams = [lp.add_unknown(f"lam[{tag}].{j}", nonneg=True) for j in range(len(premise))]
    monos: list[Monomial] = []
    for m in list(conclusion) + [m for a in premise for m in a.terms]:
        if m not in monos:
            monos.append(m)
    for m in monos:
        combo = LinExpr()
        for lam, a in zip(lams, premise):
            c = a.coeff(m)
            if c:
                combo = combo + lam * c
        diff = conclusion.get(m, LinExpr()) - combo
        if m == ONE:
            lp.geq(diff)
        elif not diff.is_zero():
            lp.eq(diff)
    return lp


def _merge(into: LPProblem, frag: LPProblem) -> None:
    into.nonneg |= frag.nonneg
    into.free |= frag.free
    into.constraints.extend(frag.constraints)


def _locations(p: PIP, ids: Iterable[str]) -> list[str]:
    locs: list[str] = []
    for gid in ids:
        g = p.gt(gid)
        for loc in (g.source,) + g.targets():
            if loc not in locs:
                locs.append(loc)
    order = {loc: i for i, loc in enumerate(p.locations)}
    return sorted(locs, key=lambda loc: order.get(loc, len(order)))


def _sorted_ids(p: PIP, ids: Iterable[str]) -> list[str]:
    order = {g.id: i for i, g in enumerate(p.general_transitions)}
    return sorted(set(ids), key=lambda gid: order[gid])


def needs_boundedness(g: GeneralTransition, decreasing: bool) -> bool:
    return decreasing or not g.is_deterministic()


def synthesize_plrf(
    p: PIP,
    gt_decr: Iterable[str],
    gt_ni: Iterable[str],
    constant_at: Iterable[str] = (),
    minimize_at: Iterable[str] | None = None,
) -> PLRF | None:
    """Search a PLRF for ``gt_decr`` within ``gt_ni`` (ids of general transitions)."""
    decr = frozenset(gt_decr)
    ni = frozenset(gt_ni) | decr
    lp = LPProblem()
    tpl = _Template(lp, p.pv, _locations(p, ni), constant_at)
    for k, gid in enumerate(_sorted_ids(p, ni)):
        g = p.gt(gid)
        premise = list(g.guard.atoms)
        post: TPoly = {}
        for t in g.members:
            post = _tp_add(post, tpl.after(t.target, _expected_sigma(t)), t.prob)
        concl = _tp_add(tpl.at(g.source), post, -1)
        if gid in decr:
            concl = _tp_add(concl, {ONE: LinExpr(const=-1)})
        _merge(lp, farkas_entail(premise, concl, f"{k}.ni"))
        if needs_boundedness(g, gid in decr):
            for t in g.members:
                sigma, support = _sample_sigma(t)
                _merge(lp, farkas_entail(premise + support, tpl.after(t.target, sigma), f"{k}.{t.id}.bd"))
    weights = tpl.weights(tpl.locs if minimize_at is None else minimize_at)
    sol = lp_feasible(lp, weights)
    if sol is None:
        return None
    return PLRF(tpl.instantiate(sol), decr, ni)


def synthesize_lrf(
    p_abs: PIP,
    decr: Iterable[str],
    ni: Iterable[str],
    constant_at: Iterable[str] = (),
    minimize_at: Iterable[str] | None = None,
) -> PLRF | None:
    """Classic linear ranking function on a program without probabilistic choice."""
    decr = frozenset(decr)
    ni = frozenset(ni) | decr
    lp = LPProblem()
    tpl = _Template(lp, p_abs.pv, _locations(p_abs, ni), constant_at)
    for k, gid in enumerate(_sorted_ids(p_abs, ni)):
        g = p_abs.gt(gid)
        premise = list(g.guard.atoms)
        for t in g.members:
            if t.has_dist():
                raise ValueError("synthesize_lrf expects a program without sampling")
            concl = _tp_add(tpl.at(g.source), tpl.after(t.target, dict(t.update)), -1)
            if gid in decr:
                concl = _tp_add(concl, {ONE: LinExpr(const=-1)})
                _merge(lp, farkas_entail(premise, _tp_add(tpl.at(g.source), {ONE: LinExpr(const=-1)}),
                                         f"{k}.{t.id}.pre"))
            _merge(lp, farkas_entail(premise, concl, f"{k}.{t.id}.ni"))
    weights = tpl.weights(tpl.locs if minimize_at is None else minimize_at)
    sol = lp_feasible(lp, weights)
    if sol is None:
        return None
    return PLRF(tpl.instantiate(sol), decr, ni)


# verification -----------------------------------------------------------------------
@dataclass(frozen=True)
class Counterexample:
    condition: str
    g: str
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.condition} violated on {self.g}" + (f": {self.detail}" if self.detail else "")


def _box_sampler(atoms: Sequence[Polynomial], names: Sequence[str], box: int, rng: random.Random):
    """Draw states from ``[-box, box]^names`` satisfying all atoms (rejection sampling)."""
    lo = {v: -box for v in names}
    hi = {v: box for v in names}
    for a in atoms:  # shrink the box with single-variable atoms
        vs = a.vars()
        if len(vs) == 1 and a.is_linear():
            (v,) = vs
            c, k = a.linear_coeff(v), a.constant_term
            if c > 0:
                lo[v] = max(lo[v], -((k / c).__floor__()))
            else:
                hi[v] = min(hi[v], (k / -c).__floor__())
    if any(lo[v] > hi[v] for v in names):
        return None

    def draw(limit: int):
        for _ in range(limit):
            s = {v: rng.randint(lo[v], hi[v]) for v in names}
            if all(eval_poly(a, s) >= 0 for a in atoms):
                return s
        return None

    return draw


def verify_plrf(
    p: PIP, r: PLRF, samples: int = 1000, rng: random.Random | None = None, box: int = 10
) -> Counterexample | None:
    """Check a PLRF: expected conditions symbolically and numerically, boundedness by sampling."""
    rng = rng or random.Random(0)
    for loc, poly in r.r.items():
        if not poly.is_linear() or not poly.vars() <= set(p.pv):
            return Counterexample("Linearity", loc, str(poly))
    for gid in _sorted_ids(p, r.gt_ni):
        g = p.gt(gid)
        decreasing = gid in r.gt_decr
        name = "Decrease" if decreasing else "Non-Increase"
        drop = 1 if decreasing else 0
        slack = r.at(g.source) - expected_post(r, g) - drop
        sol = lp_feasible(farkas_entail(list(g.guard.atoms), slack, f"v.{gid}"))
        if sol is None:
            return Counterexample(name, gid, f"{r.at(g.source)} - E[post] = {slack + drop}")
        names = sorted(g.guard.vars() | set(p.pv) | {v for t in g.members for v in t.vars()})
        draw = _box_sampler(g.guard.atoms, names, box, rng)
        if draw is None:
            continue
        check_bounds = needs_boundedness(g, decreasing)
        for _ in range(samples):
            s = draw(200)
            if s is None:
                break
            if eval_poly(slack, s) < 0:
                return Counterexample(name, gid, f"state {s}")
            if not check_bounds:
                continue
            for t in g.members:
                try:
                    post = dict(s)
                    for x, rhs in t.update:
                        post[x] = s[x] + dist_sample(rhs, s, rng) if is_dist(rhs) else eval_poly(rhs, s)
                except SimulationFault:
                    continue
                if eval_poly(r.at(t.target), post) < 0:
                    return Counterexample("Boundedness", gid, f"{t.id} from {s}")
    return None


# candidates -------------------------------------------------------------------------
def candidate_gtni(p: PIP, g: GeneralTransition | str) -> list[frozenset[str]]:
    """Candidate non-increasing sets: the SCC of ``g`` in the location graph, then ``{g}``."""
    g = p.gt(g) if isinstance(g, str) else g
    comp = scc_map(location_graph(p))
    scc = comp[g.source]
    out: list[frozenset[str]] = []
    if any(loc in scc for loc in g.targets()):
        inner = frozenset(h.id for h in p.general_transitions
                          if h.source in scc and any(loc in scc for loc in h.targets()))
        out.append(inner)
    single = frozenset({g.id})
    if single not in out:
        out.append(single)
    return out
