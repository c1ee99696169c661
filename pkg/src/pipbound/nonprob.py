"""Non-probabilistic runtime and size bounds on the abstracted program."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .arith import Polynomial
from .bounds import INF, ONE_B, ZERO, Bound, overapprox, prefer
from .graphs import scc_map, scc_topological
from .pip import PIP, Transition, entry, location_graph, start_locations
from .ranking import PLRF, candidate_gtni, synthesize_lrf

Node = tuple[str, str]  # (transition id, variable)


@dataclass
class BoundPair:
    """Runtime bound per transition id and size bound per (transition id, variable)."""

    rt: dict[str, Bound] = field(default_factory=dict)
    sz: dict[Node, Bound] = field(default_factory=dict)

    def runtime(self, tid: str) -> Bound:
        return self.rt.get(tid, INF)

    def size(self, tid: str, x: str) -> Bound:
        return self.sz.get((tid, x), INF)

    def copy(self) -> BoundPair:
        return BoundPair(dict(self.rt), dict(self.sz))


# local bounds -----------------------------------------------------------------------
def temp_bound(atoms: Iterable[Polynomial], u: str, pv: Iterable[str]) -> Bound:
    """Bound on ``|u|`` for a temporary, over pre-state program variables.

    Uses atoms ``c*u + rest >= 0`` whose ``rest`` mentions program variables only.
    """
    pv = set(pv)
    uppers: list[Polynomial] = []
    lowers: list[Polynomial] = []
    for a in atoms:
        if u not in a.vars() or not a.is_linear():
            continue
        c = a.linear_coeff(u)
        rest = a - Polynomial.var(u) * c
        if not rest.vars() <= pv:
            continue
        if c > 0:
            lowers.append(rest * (-1 / c))
        else:
            uppers.append(rest * (1 / -c))
    if not uppers or not lowers:
        return INF
    best = INF
    for up in uppers:
        for lo in lowers:
            best = prefer(best, _interval_abs(lo, up))
    return best


def _interval_abs(lo: Polynomial, up: Polynomial) -> Bound:
    if lo.is_constant() and up.is_constant():
        return Bound.const(max(abs(lo.constant_term), abs(up.constant_term)))
    if lo.is_constant() and lo.constant_term >= 0:
        return overapprox(up)
    if up.is_constant() and up.constant_term <= 0:
        return overapprox(lo)
    return overapprox(up) + overapprox(lo)


def _rhs_poly(t: Transition, x: str) -> Polynomial:
    rhs = t.rhs(x)
    if not isinstance(rhs, Polynomial):
        raise ValueError("expected the non-probabilistic abstraction")
    return rhs


class LocalBounds:
    """Per-transition local size and change bounds in pre-state program variables."""

    def __init__(self, p_abs: PIP):
        self.p = p_abs
        self.pv = tuple(p_abs.pv)
        self._tv: dict[Node, Bound] = {}
        self._size: dict[Node, Bound] = {}
        self._change: dict[Node, Bound] = {}

    def max_tv(self, t: Transition, u: str) -> Bound:
        key = (t.id, u)
        if key not in self._tv:
            self._tv[key] = temp_bound(t.guard.atoms, u, self.pv)
        return self._tv[key]

    def _close(self, t: Transition, b: Bound) -> Bound:
        temps = {u: self.max_tv(t, u) for u in b.vars() if u not in self.pv}
        return b.substitute(temps) if temps else b

    def size(self, t: Transition, x: str) -> Bound:
        """``ceil(eta(x))`` with temporaries replaced by their bounds."""
        key = (t.id, x)
        if key not in self._size:
            self._size[key] = self._close(t, overapprox(_rhs_poly(t, x)))
        return self._size[key]

    def change(self, t: Transition, x: str) -> Bound:
        """``ceil(eta(x) - x)`` with temporaries replaced by their bounds."""
        key = (t.id, x)
        if key not in self._change:
            self._change[key] = self._close(t, overapprox(_rhs_poly(t, x) - Polynomial.var(x)))
        return self._change[key]


# result variable graph --------------------------------------------------------------
def _pre(p: PIP) -> dict[str, list[Transition]]:
    out: dict[str, list[Transition]] = {t.id: [] for t in p.transitions()}
    for t in p.transitions():
        for t2 in p.transitions():
            if t2.target == t.source:
                out[t.id].append(t2)
    return out


def inc(p: PIP, pre: Mapping[str, list[Transition]], t: Transition, y: str, sz: Callable[[str, str], Bound]) -> Bound:
    """Bound on ``|y|`` before ``t`` fires."""
    if t.source == p.initial:
        return Bound.var(y)
    out = ZERO
    for t2 in pre[t.id]:
        out = out + sz(t2.id, y)
    return out


def _inc_subst(p, pre, t, b: Bound, sz) -> Bound:
    return b.substitute({y: inc(p, pre, t, y, sz) for y in b.vars()})


def rv_graph(p: PIP, local: LocalBounds) -> tuple[list[Node], dict[Node, list[Node]]]:
    """Nodes ``(t, x)``; an edge ``(t', y) -> (t, x)`` when ``t'`` precedes ``t`` and
    ``y`` occurs in the local size bound of ``(t, x)``."""
    pre = _pre(p)
    nodes = [(t.id, x) for t in p.transitions() for x in p.pv]
    succ: dict[Node, list[Node]] = {n: [] for n in nodes}
    for t in p.transitions():
        for x in p.pv:
            for y in sorted(local.size(t, x).vars()):
                for t2 in pre[t.id]:
                    if (t.id, x) not in succ[(t2.id, y)]:
                        succ[(t2.id, y)].append((t.id, x))
    return nodes, succ


def nonprob_size(p_abs: PIP, rt: Mapping[str, Bound], old: Mapping[Node, Bound] | None = None,
                 local: LocalBounds | None = None) -> dict[Node, Bound]:
    """Size bounds per (transition, variable), improving ``old`` under ``prefer``."""
    local = local or LocalBounds(p_abs)
    sz: dict[Node, Bound] = dict(old or {})
    get = lambda tid, x: sz.get((tid, x), INF)  # noqa: E731
    pre = _pre(p_abs)
    nodes, succ = rv_graph(p_abs, local)
    for comp in scc_topological(nodes, ((a, b) for a in succ for b in succ[a])):
        trivial = len(comp) == 1 and comp[0] not in succ[comp[0]]
        inside = set(comp)
        direct = {}
        for tid, x in comp:
            t = p_abs.transition(tid)
            direct[(tid, x)] = _inc_subst(p_abs, pre, t, local.size(t, x), get)
        if trivial:
            n = comp[0]
            sz[n] = prefer(get(*n), direct[n])
            continue
        for x in dict.fromkeys(v for _, v in comp):
            members = [tid for tid, v in comp if v == x]
            total = ZERO
            seen: set[str] = set()
            for tid in members:
                t = p_abs.transition(tid)
                if t.source == p_abs.initial:
                    total = total + Bound.var(x)
                for t2 in pre[tid]:
                    if (t2.id, x) not in inside and t2.id not in seen:
                        seen.add(t2.id)
                        total = total + get(t2.id, x)
            for tid in members:
                t = p_abs.transition(tid)
                ch = local.change(t, x)
                if not ch.is_zero():
                    total = total + rt.get(tid, INF) * _inc_subst(p_abs, pre, t, ch, get)
            for tid in members:
                n = (tid, x)
                sz[n] = prefer(get(*n), prefer(direct[n], total))
    return sz


# runtime ----------------------------------------------------------------------------
def initial_runtimes(p: PIP) -> dict[str, Bound]:
    """1 for transitions on no cycle of the location graph, otherwise infinity."""
    comp = scc_map(location_graph(p))
    out = {}
    for g in p.general_transitions:
        for t in g.members:
            cyclic = comp[t.source] == comp[t.target] and (
                len(comp[t.source]) > 1 or t.source == t.target)
            out[t.id] = INF if cyclic else ONE_B
    return out


def ranking_bound(p: PIP, r: PLRF, weight: Callable[[str], Bound],
                  entry_size: Callable[[str, str, str], Bound]) -> Bound:
    """Sum over entry locations of the entry weight times ``ceil(r)`` at the entry sizes.

    ``weight(h)`` is the number of entries through ``h``; ``entry_size(h, loc, x)``
    bounds ``|x|`` after entering ``loc`` via ``h``. The initial location, when it
    starts the ranked sub-program, counts as one entry with unchanged sizes.
    """
    total = ZERO
    for loc, ets in entry(p, r.gt_ni).items():
        rank = overapprox(r.at(loc))
        for h in sorted(ets, key=lambda g: g.id):
            w = weight(h.id)
            if w.is_zero() or rank.is_zero():
                continue
            total = total + w * rank.substitute({x: entry_size(h.id, loc, x) for x in rank.vars()})
    if p.initial in start_locations(p, r.gt_ni):
        total = total + overapprox(r.at(p.initial))
    return total


def entry_locations(p: PIP, ni: Iterable[str]) -> list[str]:
    """Start locations of ``ni`` entered from outside, including a starting initial location."""
    locs = list(entry(p, ni))
    if p.initial in start_locations(p, ni) and p.initial not in locs:
        locs.append(p.initial)
    return locs


class RankingCache:
    """Memoised ranking function searches; results do not depend on bounds."""

    def __init__(self, p: PIP, synth: Callable[..., PLRF | None]):
        self.p = p
        self.synth = synth
        self._cache: dict[tuple[str, frozenset[str]], list[PLRF]] = {}

    def functions(self, gid: str) -> list[PLRF]:
        out: list[PLRF] = []
        for ni in candidate_gtni(self.p, gid):
            key = (gid, ni)
            if key not in self._cache:
                found = []
                entries = entry_locations(self.p, ni)
                for const in (True, False):
                    r = self.synth(self.p, {gid}, ni, constant_at=entries if const else (),
                                   minimize_at=entries)
                    if r is not None and r not in found:
                        found.append(r)
                self._cache[key] = found
            out += self._cache[key]
        return out


def nonprob_runtime(p_abs: PIP, sz: Mapping[Node, Bound], old: Mapping[str, Bound] | None = None,
                    cache: RankingCache | None = None) -> dict[str, Bound]:
    """Runtime bounds per transition, improving ``old`` under ``prefer``."""
    cache = cache or RankingCache(p_abs, synthesize_lrf)
    rt = dict(old) if old is not None else initial_runtimes(p_abs)
    snapshot = dict(rt)
    for t in p_abs.transitions():
        if rt[t.id].is_constant():
            continue
        for r in cache.functions(t.id):
            b = ranking_bound(
                p_abs, r,
                weight=lambda h: snapshot.get(h, INF),
                entry_size=lambda h, loc, x: sz.get((h, x), INF),
            )
            rt[t.id] = prefer(rt[t.id], b)
    return rt


def nonprob_bounds(p_abs: PIP, max_rounds: int | None = None) -> BoundPair:
    """Alternate size and runtime improvement until nothing changes."""
    cap = max_rounds if max_rounds is not None else max(2, 2 * len(p_abs.general_transitions))
    local = LocalBounds(p_abs)
    cache = RankingCache(p_abs, synthesize_lrf)
    bp = BoundPair(initial_runtimes(p_abs), {})
    for _ in range(cap):
        sz = nonprob_size(p_abs, bp.rt, bp.sz, local)
        rt = nonprob_runtime(p_abs, sz, bp.rt, cache)
        if sz == bp.sz and rt == bp.rt:
            break
        bp = BoundPair(rt, sz)
    return bp
