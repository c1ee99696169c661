"""Expected local change bounds, the general result variable graph and size improvement."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .arith import Polynomial
from .bounds import ZERO, Bound, is_linear, overapprox
from .exprt import ExpectedBoundPair
from .graphs import scc_topological
from .nonprob import BoundPair, temp_bound
from .pip import GRV, PIP, GeneralTransition, dist_abs_bound, is_dist, pre_transitions


def _member_change(p: PIP, t, x: str) -> Bound:
    rhs = t.rhs(x)
    if is_dist(rhs):
        return dist_abs_bound(rhs)
    b = overapprox(rhs - Polynomial.var(x))
    temps = {u: temp_bound(t.guard.atoms, u, p.pv) for u in b.vars() if u not in p.pv}
    return b.substitute(temps) if temps else b


def change_bound(p: PIP, bp: BoundPair | None, alpha: GRV) -> Bound:
    """Expected absolute change of ``x`` when ``g`` moves to ``loc``, over the pre-state.

    Temporaries are bounded locally from the guard, so ``bp`` is not consulted.
    """
    g = p.gt(alpha.g)
    out = ZERO
    for t in g.members:
        if t.target == alpha.loc:
            out = out + _member_change(p, t, alpha.var) * t.prob
    return out


def change_bounds(p: PIP, bp: BoundPair | None = None) -> dict[GRV, Bound]:
    return {a: change_bound(p, bp, a) for a in p.grvs()}


def actv(alpha: GRV, ch: Mapping[GRV, Bound]) -> frozenset[str]:
    return (Bound.var(alpha.var) + ch[alpha]).vars()


@dataclass
class GRVGraph:
    nodes: list[GRV]
    succ: dict[GRV, list[GRV]]
    scc_order: list[list[GRV]]

    def preds(self, alpha: GRV) -> list[GRV]:
        return [b for b in self.nodes if alpha in self.succ[b]]

    def is_trivial(self, comp: list[GRV]) -> bool:
        return len(comp) == 1 and comp[0] not in self.succ[comp[0]]


def build_grv_graph(p: PIP, ch: Mapping[GRV, Bound]) -> GRVGraph:
    nodes = p.grvs()
    succ: dict[GRV, list[GRV]] = {n: [] for n in nodes}
    for alpha in nodes:
        g = p.gt(alpha.g)
        used = actv(alpha, ch)
        for h in sorted(pre_transitions(p, g), key=lambda h: h.id):
            for y in p.pv:
                if y in used:
                    beta = GRV(h.id, g.source, y)
                    if alpha not in succ[beta]:
                        succ[beta].append(alpha)
    order = scc_topological(nodes, ((a, b) for a in nodes for b in succ[a]))
    return GRVGraph(nodes, succ, order)


def _pre_sorted(p: PIP, g: GeneralTransition) -> list[GeneralTransition]:
    return sorted(pre_transitions(p, g), key=lambda h: h.id)


def inc_e(p: PIP, ebp: ExpectedBoundPair, g: GeneralTransition, y: str) -> Bound:
    """Expected size of ``y`` when ``g`` starts."""
    out = ZERO
    for h in _pre_sorted(p, g):
        out = out + ebp.size(h.id, g.source, y)
    return out


def inc(p: PIP, bp: BoundPair, g: GeneralTransition, y: str) -> Bound:
    """Non-probabilistic size of ``y`` when ``g`` starts."""
    if g.source == p.initial:
        return Bound.var(y)
    out = ZERO
    for h in _pre_sorted(p, g):
        for t in h.members:
            if t.target == g.source:
                out = out + bp.size(t.id, y)
    return out


def _subst(b: Bound, f) -> Bound:
    return b.substitute({y: f(y) for y in b.vars()})


def improve_size_trivial(p: PIP, bp: BoundPair, ebp: ExpectedBoundPair, ch: Mapping[GRV, Bound],
                         alpha: GRV) -> Bound:
    g = p.gt(alpha.g)
    x = Bound.var(alpha.var)
    c = ch[alpha]
    if g.source == p.initial:
        return x + c
    if is_linear(c):
        return _subst(x + c, lambda y: inc_e(p, ebp, g, y))
    return inc_e(p, ebp, g, alpha.var) + _subst(c, lambda y: inc(p, bp, g, y))


def improve_size_nontrivial(p: PIP, bp: BoundPair, ebp: ExpectedBoundPair, ch: Mapping[GRV, Bound],
                            comp: list[GRV], graph: GRVGraph | None = None) -> dict[GRV, Bound]:
    graph = graph or build_grv_graph(p, ch)
    inside = set(comp)
    out: dict[GRV, Bound] = {}
    for x in dict.fromkeys(a.var for a in comp):
        total = ZERO
        seen: set[GRV] = set()
        for beta in graph.nodes:
            if beta in inside or beta.var != x or beta in seen:
                continue
            if any(a in inside for a in graph.succ[beta]):
                seen.add(beta)
                total = total + ebp.size(*beta)
        for gid in dict.fromkeys(a.g for a in comp):
            g = p.gt(gid)
            local = ZERO
            for a in comp:
                if a.g == gid and a.var == x:
                    local = local + _subst(ch[a], lambda y: inc(p, bp, g, y))
            if not local.is_zero():
                total = total + ebp.runtime(gid) * local
        for a in comp:
            if a.var == x:
                out[a] = total
    return out
