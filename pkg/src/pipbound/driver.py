"""Alternating expected size and runtime improvement, and the final report."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .bounds import ZERO, AsymptoticClass, Bound, asymptotic_class, prefer
from .exprt import ExpectedBoundPair, improve_runtime, lift, plrf_cache
from .expsize import build_grv_graph, change_bounds, improve_size_nontrivial, improve_size_trivial
from .nonprob import BoundPair, nonprob_bounds
from .pip import GRV, PIP, abstract_nonprob
from .preprocess import preprocess


@dataclass(frozen=True)
class AnalysisConfig:
    max_rounds: int = 5
    timeout: float | None = None
    no_invariants: bool = False


@dataclass
class AnalysisReport:
    program: PIP
    rt_e: dict[str, Bound]
    sz_e: dict[GRV, Bound]
    total: Bound
    cls: AsymptoticClass
    iterations: int
    wall_time: float
    timed_out: bool = False
    converged: bool = False
    removed: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "general_transitions": [
                {"id": g.id, "cost": str(g.cost), "runtime": str(self.rt_e[g.id])}
                for g in self.program.general_transitions
            ],
            "grvs": [
                {"g": a.g, "location": a.loc, "var": a.var, "size": str(b)}
                for a, b in self.sz_e.items()
            ],
            "total": str(self.total),
            "class": str(self.cls),
            "iterations": self.iterations,
            "timed_out": self.timed_out,
            "converged": self.converged,
            "removed": list(self.removed),
            "wall_time": round(self.wall_time, 6),
        }


class _Clock:
    def __init__(self, limit: float | None):
        self.start = time.monotonic()
        self.limit = limit

    def expired(self) -> bool:
        return self.limit is not None and time.monotonic() - self.start > self.limit

    def elapsed(self) -> float:
        return time.monotonic() - self.start


def analyze(p: PIP, cfg: AnalysisConfig = AnalysisConfig(), pair: BoundPair | None = None) -> AnalysisReport:
    """Infer expected runtime and size bounds; ``pair`` replaces the non-probabilistic bounds."""
    clock = _Clock(cfg.timeout)
    q = preprocess(p, invariants=not cfg.no_invariants)
    kept = {g.id for g in q.general_transitions}
    removed = [g.id for g in p.general_transitions if g.id not in kept]
    bp = pair if pair is not None else nonprob_bounds(abstract_nonprob(q))
    ebp = lift(bp, q)
    ch = change_bounds(q, bp)
    graph = build_grv_graph(q, ch)
    cache = plrf_cache(q)
    rounds, timed_out, converged = 0, False, False
    while rounds < cfg.max_rounds and not ebp.all_finite():
        if clock.expired():
            timed_out = True
            break
        rounds += 1
        before = ebp.copy()
        for comp in graph.scc_order:
            if clock.expired():
                timed_out = True
                break
            if graph.is_trivial(comp):
                a = comp[0]
                ebp.sz_e[a] = prefer(ebp.sz_e[a], improve_size_trivial(q, bp, ebp, ch, a))
            else:
                for a, b in improve_size_nontrivial(q, bp, ebp, ch, comp, graph).items():
                    ebp.sz_e[a] = prefer(ebp.sz_e[a], b)
        fresh = {}
        for g in q.general_transitions:
            if timed_out or clock.expired():
                timed_out = True
                break
            if ebp.rt_e[g.id].is_constant():
                continue
            fresh[g.id] = improve_runtime(q, bp, ebp, g, cache)
        ebp.rt_e.update(fresh)
        if timed_out:
            break
        if ebp.rt_e == before.rt_e and ebp.sz_e == before.sz_e:
            converged = True
            break
    if ebp.all_finite():
        converged = True
    total = ZERO
    for g in q.general_transitions:
        total = total + ebp.runtime(g.id) * g.cost
    return AnalysisReport(
        program=q,
        rt_e=dict(ebp.rt_e),
        sz_e=dict(ebp.sz_e),
        total=total,
        cls=asymptotic_class(total),
        iterations=rounds,
        wall_time=clock.elapsed(),
        timed_out=timed_out,
        converged=converged,
        removed=removed,
    )


__all__ = ["AnalysisConfig", "AnalysisReport", "ExpectedBoundPair", "analyze"]
