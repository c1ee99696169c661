"""Expected bound pairs: lifting and expected runtime improvement."""

from __future__ import annotations

from dataclasses import dataclass, field

from .bounds import INF, ZERO, Bound, is_linear, overapprox, prefer
from .nonprob import BoundPair, RankingCache
from .pip import GRV, PIP, GeneralTransition, entry, start_locations
from .ranking import PLRF, synthesize_plrf


@dataclass
class ExpectedBoundPair:
    """Expected runtime per general transition id and expected size per GRV."""

    rt_e: dict[str, Bound] = field(default_factory=dict)
    sz_e: dict[GRV, Bound] = field(default_factory=dict)

    def runtime(self, gid: str) -> Bound:
        return self.rt_e.get(gid, INF)

    def size(self, g: str, loc: str, x: str) -> Bound:
        return self.sz_e.get(GRV(g, loc, x), INF)

    def copy(self) -> ExpectedBoundPair:
        return ExpectedBoundPair(dict(self.rt_e), dict(self.sz_e))

    def all_finite(self) -> bool:
        return all(b.is_finite for b in self.rt_e.values()) and all(b.is_finite for b in self.sz_e.values())


def lift(bp: BoundPair, p: PIP) -> ExpectedBoundPair:
    """Sum member bounds: runtimes over all members, sizes over members reaching the location."""
    out = ExpectedBoundPair()
    for g in p.general_transitions:
        rt = ZERO
        for t in g.members:
            rt = rt + bp.runtime(t.id)
        out.rt_e[g.id] = rt
        for loc in g.targets():
            for x in p.pv:
                s = ZERO
                for t in g.members:
                    if t.target == loc:
                        s = s + bp.size(t.id, x)
                out.sz_e[GRV(g.id, loc, x)] = s
    return out


def plrf_cache(p: PIP) -> RankingCache:
    return RankingCache(p, synthesize_plrf)


def nonprob_entry_runtime(bp: BoundPair, h: GeneralTransition, loc: str) -> Bound:
    """Non-probabilistic number of entries into ``loc`` through members of ``h``."""
    out = ZERO
    for t in h.members:
        if t.target == loc:
            out = out + bp.runtime(t.id)
    return out


def runtime_from_plrf(p: PIP, bp: BoundPair, ebp: ExpectedBoundPair, r: PLRF) -> Bound:
    """Expected runtime bound for the decreasing transitions of ``r``.

    Entry locations with a non-constant ranking value are weighted by the
    non-probabilistic entry runtimes, constant ones by expected entry runtimes.
    """
    total = ZERO
    for loc, ets in entry(p, r.gt_ni).items():
        rank = overapprox(r.at(loc))
        if rank.is_zero():
            continue
        assert is_linear(rank), f"ranking value at {loc} is not linear"
        for h in sorted(ets, key=lambda g: g.id):
            if rank.is_constant():
                total = total + ebp.runtime(h.id) * rank
            else:
                sizes = {x: ebp.size(h.id, loc, x) for x in rank.vars()}
                total = total + nonprob_entry_runtime(bp, h, loc) * rank.substitute(sizes)
    if p.initial in start_locations(p, r.gt_ni):
        total = total + overapprox(r.at(p.initial))
    return total


def improve_runtime(p: PIP, bp: BoundPair, ebp: ExpectedBoundPair, g: GeneralTransition | str,
                    cache: RankingCache | None = None) -> Bound:
    """Best of the current bound and every bound obtained from a PLRF for ``g``."""
    gid = g if isinstance(g, str) else g.id
    cache = cache or plrf_cache(p)
    best = ebp.runtime(gid)
    for r in cache.functions(gid):
        best = prefer(best, runtime_from_plrf(p, bp, ebp, r))
    return best
