"""Monte-Carlo interpreter for probabilistic integer programs.

Trials run in lockstep on numpy arrays: every iteration advances each live
trial by one step. A single batch of size one gives the scalar ``step``.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .arith import Polynomial
from .pip import (
    GRV,
    PIP,
    Bernoulli,
    Binomial,
    Geometric,
    GeneralTransition,
    Hypergeometric,
    SimulationFault,
    Uniform,
    is_dist,
)

OVERFLOW = 2.0**62
MAX_CANDIDATES = 5000


# schedulers -------------------------------------------------------------------------
@dataclass(frozen=True)
class Scheduler:
    """Resolves the choice of general transition and of temporary values.

    ``first`` takes the first enabled general transition in program order and the
    smallest guard-satisfying temporaries; ``random`` draws both uniformly;
    ``scripted`` follows ``script`` (general transition ids per step) while the
    scripted transition is enabled and otherwise behaves like ``first``.
    Temporaries range over ``[-box, box]``.
    """

    strategy: str = "first"
    seed: int = 0
    script: tuple[str, ...] = ()
    box: int = 16

    def __post_init__(self) -> None:
        if self.strategy not in ("first", "random", "scripted"):
            raise ValueError(f"unknown scheduler strategy {self.strategy!r}")

    def __str__(self) -> str:
        if self.strategy == "random":
            return f"RandomEnabled({self.seed})"
        if self.strategy == "scripted":
            return f"Scripted({list(self.script)})"
        return "FirstEnabled"


def FirstEnabled(box: int = 16) -> Scheduler:  # noqa: N802 - scheduler tags
    return Scheduler("first", box=box)


def RandomEnabled(seed: int = 0, box: int = 16) -> Scheduler:  # noqa: N802
    return Scheduler("random", seed=seed, box=box)


def Scripted(script: Sequence[str], box: int = 16) -> Scheduler:  # noqa: N802
    return Scheduler("scripted", script=tuple(script), box=box)


@dataclass(frozen=True)
class Config:
    """Location (``None`` once terminated), last transition id and state."""

    location: str | None
    last: str | None
    state: Mapping[str, int]

    @property
    def terminal(self) -> bool:
        return self.location is None


# compilation ------------------------------------------------------------------------
class _Poly:
    """Vectorised polynomial over named integer columns, scaled to integer coefficients."""

    def __init__(self, p: Polynomial, names: Sequence[str]):
        self.den = 1
        for c in p.terms.values():
            self.den = self.den * c.denominator // math.gcd(self.den, c.denominator)
        pos = {v: i for i, v in enumerate(names)}
        parts = []
        for m, c in p.terms.items():
            factors = [str(int(c * self.den))]
            for v, e in m:
                factors.append(f"c[{pos[v]}]" + (f"**{e}" if e > 1 else ""))
            parts.append("*".join(factors))
        body = " + ".join(parts) if parts else "0"
        self.degree = p.degree()
        self.constant = p.is_constant()
        self.fn = eval(f"lambda c: {body}")  # noqa: S307 - generated from parsed terms only

    def scaled(self, cols: Sequence[np.ndarray], n: int) -> np.ndarray:
        """Integer values of ``den * p`` and a mask of rows that overflowed."""
        v = self.fn(cols)
        if self.constant:
            v = np.full(n, v, dtype=np.int64)
        return v

    def overflow(self, cols: Sequence[np.ndarray], n: int) -> np.ndarray:
        if self.degree <= 1:
            return np.zeros(n, dtype=bool)
        f = self.fn([c.astype(np.float64) for c in cols])
        return np.abs(np.broadcast_to(f, (n,))) > OVERFLOW


def _ceil_div(a: np.ndarray, b: int) -> np.ndarray:
    return -((-a) // b)


@dataclass
class _Gt:
    g: GeneralTransition
    index: int
    temps: list[str]
    names: list[str]
    atoms: list[_Poly]
    interval: list[tuple[int, int, _Poly]] | None  # (temporary index or -1, coefficient, rest) per atom
    cum: np.ndarray
    updates: list[list[tuple[int, object]]]  # per member: (pv index, _Poly or distribution)
    targets: list[int] = field(default_factory=list)
    grv_cols: list[list[int]] = field(default_factory=list)


class Simulator:
    def __init__(self, p: PIP, sch: Scheduler):
        self.p = p
        self.sch = sch
        self.pv = list(p.pv)
        self.locs = list(p.locations)
        self.loc_index = {loc: i for i, loc in enumerate(self.locs)}
        self.grvs: list[GRV] = p.grvs()
        grv_index = {a: i for i, a in enumerate(self.grvs)}
        self.tids = [t.id for t in p.transitions()]
        self.by_loc: dict[int, list[_Gt]] = {i: [] for i in range(len(self.locs))}
        self.gts: list[_Gt] = []
        tid_index = {t: i for i, t in enumerate(self.tids)}
        self.member_tid: list[list[int]] = []
        for gi, g in enumerate(p.general_transitions):
            temps = sorted(set().union(*(t.vars() for t in g.members)) - set(self.pv))
            names = self.pv + temps
            atoms = list(g.guard.atoms) + list(g.guard.nonlinear)
            cg = _Gt(
                g=g, index=gi, temps=temps, names=names,
                atoms=[_Poly(a, names) for a in atoms],
                interval=self._interval_form(atoms, temps, names),
                cum=np.cumsum([float(t.prob) for t in g.members]), updates=[],
            )
            for t in g.members:
                ups = []
                for x, rhs in t.update:
                    j = self.pv.index(x)
                    if is_dist(rhs):
                        ups.append((j, (rhs, [_Poly(q, names) for q in rhs.params()])))
                    else:
                        ups.append((j, _Poly(rhs, names)))
                cg.updates.append(ups)
                cg.targets.append(self.loc_index[t.target])
                cg.grv_cols.append([grv_index[GRV(g.id, t.target, x)] for x in self.pv])
            self.member_tid.append([tid_index[t.id] for t in g.members])
            self.gts.append(cg)
            self.by_loc[self.loc_index[g.source]].append(cg)

    @staticmethod
    def _interval_form(atoms, temps, names):
        """Per atom ``(temporary index or -1, integer coefficient, rest)`` if no atom couples temporaries."""
        if not temps:
            return None
        out = []
        for a in atoms:
            used = [i for i, u in enumerate(temps) if u in a.vars()]
            if len(used) > 1:
                return None
            if not used:
                out.append((-1, 0, _Poly(a, names)))
                continue
            (i,) = used
            u = temps[i]
            c = a.linear_coeff(u)
            rest = a - Polynomial.var(u) * c
            if u in rest.vars() or c.denominator != 1:
                return None
            out.append((i, int(c), _Poly(rest, names)))
        return out

    # guards and temporaries ---------------------------------------------------------
    def _enabled(self, cg: _Gt, cols: list[np.ndarray], n: int, random: bool, rng):
        """Enabled mask and chosen temporary columns for ``cg``."""
        box = self.sch.box
        if not cg.temps:
            ok = np.ones(n, dtype=bool)
            for a in cg.atoms:
                ok &= a.scaled(cols, n) >= 0
            return ok, []
        if cg.interval is not None:
            k = len(cg.temps)
            lo = [np.full(n, -box, dtype=np.int64) for _ in range(k)]
            hi = [np.full(n, box, dtype=np.int64) for _ in range(k)]
            ok = np.ones(n, dtype=bool)
            pad = cols + [np.zeros(n, dtype=np.int64)] * k
            for i, c, rest in cg.interval:
                r = rest.scaled(pad, n)  # c*u_i + r >= 0 with integer c and r
                if c > 0:
                    lo[i] = np.maximum(lo[i], _ceil_div(-r, c))
                elif c < 0:
                    hi[i] = np.minimum(hi[i], r // (-c))
                else:
                    ok &= r >= 0
            vals = []
            for i in range(k):
                ok &= lo[i] <= hi[i]
            for i in range(k):
                if random:
                    v = lo[i] + np.floor(rng.random(n) * np.maximum(hi[i] - lo[i] + 1, 1)).astype(np.int64)
                    v = np.minimum(v, hi[i])
                else:
                    v = lo[i]
                vals.append(np.where(ok, v, 0))
            return ok, vals
        k = len(cg.temps)
        if (2 * box + 1) ** k > MAX_CANDIDATES:
            raise ValueError(f"{cg.g.id}: too many temporaries to enumerate")
        cands = list(itertools.product(range(-box, box + 1), repeat=k))
        sat = np.zeros((len(cands), n), dtype=bool)
        for ci, vals in enumerate(cands):
            full = cols + [np.full(n, v, dtype=np.int64) for v in vals]
            row = np.ones(n, dtype=bool)
            for a in cg.atoms:
                row &= a.scaled(full, n) >= 0
            sat[ci] = row
        count = sat.sum(axis=0)
        ok = count > 0
        if random:
            pick = np.floor(rng.random(n) * np.maximum(count, 1)).astype(np.int64)
            choice = np.argmax(np.cumsum(sat, axis=0) > pick, axis=0)
        else:
            choice = np.argmax(sat, axis=0)
        arr = np.array(cands, dtype=np.int64)[choice]
        return ok, [np.where(ok, arr[:, i], 0) for i in range(k)]

    # one synchronous step -------------------------------------------------------------
    def advance(self, st: _Batch, rows: np.ndarray, step_no: int, rng, sched_rng) -> None:
        strategy = self.sch.strategy
        at = st.loc[rows].copy()  # rows fire once even if they move to a later location
        for li, options in self.by_loc.items():
            sub = rows[at == li]
            if sub.size == 0:
                continue
            n = sub.size
            if not options:
                st.loc[sub] = -1
                continue
            cols = [st.state[sub, j] for j in range(len(self.pv))]
            masks, temps = [], []
            for cg in options:
                ok, tv = self._enabled(cg, cols, n, strategy == "random", sched_rng)
                masks.append(ok)
                temps.append(tv)
            en = np.array(masks)
            chosen = np.full(n, -1, dtype=np.int64)
            if strategy == "random":
                cnt = en.sum(axis=0)
                pick = np.floor(sched_rng.random(n) * np.maximum(cnt, 1)).astype(np.int64)
                idx = np.argmax(np.cumsum(en, axis=0) > pick, axis=0)
                chosen = np.where(cnt > 0, idx, -1)
            else:
                first = np.argmax(en, axis=0)
                chosen = np.where(en.any(axis=0), first, -1)
                if strategy == "scripted" and step_no < len(self.sch.script):
                    want = self.sch.script[step_no]
                    for oi, cg in enumerate(options):
                        if cg.g.id == want:
                            chosen = np.where(en[oi], oi, chosen)
            st.loc[sub[chosen < 0]] = -1
            for oi, cg in enumerate(options):
                mask = chosen == oi
                if mask.any():
                    self._fire(st, cg, sub[mask], [c[mask] for c in cols], [t[mask] for t in temps[oi]], rng)

    def _fire(self, st: _Batch, cg: _Gt, rows: np.ndarray, cols, temps, rng) -> None:
        n = rows.size
        member = np.minimum(np.searchsorted(cg.cum, rng.random(n), side="right"), len(cg.updates) - 1)
        full = cols + temps
        st.count[rows, cg.index] += 1
        st.steps[rows] += 1
        for mi, ups in enumerate(cg.updates):
            mask = member == mi
            if not mask.any():
                continue
            r = rows[mask]
            m = r.size
            mcols = [c[mask] for c in full]
            fault = np.zeros(m, dtype=bool)
            new = {}
            for j, upd in ups:
                if isinstance(upd, _Poly):
                    v = upd.scaled(mcols, m)
                    fault |= upd.overflow(mcols, m)
                    if upd.den != 1:
                        fault |= v % upd.den != 0
                        v = v // upd.den
                    new[j] = v
                else:
                    d, params = upd
                    sample, bad = _sample(d, [q.scaled(mcols, m) // q.den for q in params], m, rng)
                    fault |= bad
                    new[j] = mcols[j] + sample
            for j, v in new.items():
                st.state[r, j] = v
            st.last[r] = self.member_tid[cg.index][mi]
            st.loc[r] = cg.targets[mi]
            grv = cg.grv_cols[mi]
            cur = np.abs(st.state[r])
            st.maxabs[r[:, None], np.array(grv)[None, :]] = np.maximum(
                st.maxabs[r[:, None], np.array(grv)[None, :]], cur)
            if fault.any():
                st.fault[r[fault]] = True
                st.loc[r[fault]] = -1


def _sample(d, params: list[np.ndarray], n: int, rng) -> tuple[np.ndarray, np.ndarray]:
    bad = np.zeros(n, dtype=bool)
    if isinstance(d, Bernoulli):
        return (rng.random(n) < float(d.p)).astype(np.int64), bad
    if isinstance(d, Uniform):
        a, b = params
        bad = a > b
        hi = np.where(bad, a, b)
        return rng.integers(a, hi + 1), bad
    if isinstance(d, Geometric):
        if d.p == 1:
            return np.ones(n, dtype=np.int64), bad
        u = (rng.integers(0, 2**63 - 1, size=n, dtype=np.int64).astype(np.float64) + 0.5) / 2.0**63
        k = np.ceil(np.log1p(-u) / math.log1p(-float(d.p)))
        return np.maximum(k, 1).astype(np.int64), bad
    if isinstance(d, Binomial):
        (cnt,) = params
        bad = cnt < 0
        return rng.binomial(np.maximum(cnt, 0), float(d.p)).astype(np.int64), bad
    if isinstance(d, Hypergeometric):
        N, K, m = params
        bad = (K < 0) | (K > N) | (m < 0) | (m > N)
        good = np.where(bad, 0, K)
        nbad = np.where(bad, 1, N - K)
        draws = np.where(bad, 0, m)
        return rng.hypergeometric(good, nbad, draws).astype(np.int64), bad
    raise TypeError(d)


@dataclass
class _Batch:
    loc: np.ndarray
    state: np.ndarray
    last: np.ndarray
    steps: np.ndarray
    count: np.ndarray
    maxabs: np.ndarray
    fault: np.ndarray


def _batch(sim: Simulator, s0: Mapping[str, int], n: int, loc: str) -> _Batch:
    state = np.zeros((n, len(sim.pv)), dtype=np.int64)
    for j, x in enumerate(sim.pv):
        state[:, j] = int(s0.get(x, 0))
    return _Batch(
        loc=np.full(n, sim.loc_index[loc], dtype=np.int64),
        state=state,
        last=np.full(n, -1, dtype=np.int64),
        steps=np.zeros(n, dtype=np.int64),
        count=np.zeros((n, len(sim.gts)), dtype=np.int64),
        maxabs=np.zeros((n, len(sim.grvs)), dtype=np.int64),
        fault=np.zeros(n, dtype=bool),
    )


def _rngs(seed: int, sch: Scheduler):
    return np.random.default_rng([seed, 0]), np.random.default_rng([seed, 1, sch.seed])


# public operations ------------------------------------------------------------------
@functools.lru_cache(maxsize=16)
def _simulator(p: PIP, sch: Scheduler) -> Simulator:
    return Simulator(p, sch)


def step(c: Config, p: PIP, sch: Scheduler, rng: np.random.Generator, step_no: int = 0,
         sched_rng: np.random.Generator | None = None) -> Config:
    """One step from a non-terminal configuration."""
    if c.terminal:
        raise ValueError("terminal configuration has no successor")
    sim = _simulator(p, sch)
    st = _batch(sim, c.state, 1, c.location)
    sim.advance(st, np.arange(1), step_no, rng, sched_rng or rng)
    if st.fault[0]:
        raise SimulationFault("invalid distribution parameters")
    loc = None if st.loc[0] < 0 else sim.locs[st.loc[0]]
    last = sim.tids[st.last[0]] if st.last[0] >= 0 else c.last
    return Config(loc, last, {x: int(st.state[0, j]) for j, x in enumerate(sim.pv)})


def step_batch(c: Config, p: PIP, sch: Scheduler, n: int, rng: np.random.Generator,
               step_no: int = 0) -> list[Config]:
    """``n`` independent successors of ``c``; faulted successors are terminal."""
    if c.terminal:
        raise ValueError("terminal configuration has no successor")
    sim = _simulator(p, sch)
    st = _batch(sim, c.state, n, c.location)
    sim.advance(st, np.arange(n), step_no, rng, rng)
    out = []
    for i in range(n):
        loc = None if st.loc[i] < 0 else sim.locs[st.loc[i]]
        last = sim.tids[st.last[i]] if st.last[i] >= 0 else c.last
        out.append(Config(loc, last, {x: int(st.state[i, j]) for j, x in enumerate(sim.pv)}))
    return out


@dataclass
class SimStats:
    trials: int
    completed: int
    cap_hits: int
    faults: int
    rt_mean: dict[str, float]
    rt_se: dict[str, float]
    size_mean: dict[GRV, float]
    size_se: dict[GRV, float]
    # worst cases over all non-faulted trials: a capped run is a prefix of a real run
    rt_max: dict[str, int] = field(default_factory=dict)
    size_max: dict[GRV, int] = field(default_factory=dict)
    executed: dict[str, int] = field(default_factory=dict)  # trials (of all) executing g at least once

    @property
    def termination(self) -> float:
        return self.completed / self.trials if self.trials else 0.0


def _mean_se(a: np.ndarray) -> tuple[float, float]:
    if a.size == 0:
        return math.nan, math.nan
    mean = float(a.mean())
    se = float(a.std(ddof=1) / math.sqrt(a.size)) if a.size > 1 else 0.0
    return mean, se


def estimate(p: PIP, s0: Mapping[str, int], sch: Scheduler, trials: int, step_cap: int = 10**5,
             seed: int = 0) -> SimStats:
    """Empirical means and standard errors of execution counts and sizes."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    sim = Simulator(p, sch)
    st = _batch(sim, s0, trials, p.initial)
    rng, sched_rng = _rngs(seed, sch)
    capped = np.zeros(trials, dtype=bool)
    step_no = 0
    while True:
        live = np.nonzero(st.loc >= 0)[0]
        if live.size == 0:
            break
        over = live[st.steps[live] >= step_cap]
        if over.size:
            capped[over] = True
            st.loc[over] = -1
            live = np.nonzero(st.loc >= 0)[0]
            if live.size == 0:
                break
        sim.advance(st, live, step_no, rng, sched_rng)
        step_no += 1
    done = ~capped & ~st.fault
    rt_mean, rt_se, size_mean, size_se = {}, {}, {}, {}
    rt_max, size_max, executed = {}, {}, {}
    sane = ~st.fault
    for gi, cg in enumerate(sim.gts):
        rt_mean[cg.g.id], rt_se[cg.g.id] = _mean_se(st.count[done, gi])
        col = st.count[sane, gi]
        rt_max[cg.g.id] = int(col.max()) if col.size else 0
        executed[cg.g.id] = int((st.count[:, gi] > 0).sum())
    for ai, a in enumerate(sim.grvs):
        size_mean[a], size_se[a] = _mean_se(st.maxabs[done, ai])
        col = st.maxabs[sane, ai]
        size_max[a] = int(col.max()) if col.size else 0
    return SimStats(trials, int(done.sum()), int(capped.sum()), int(st.fault.sum()),
                    rt_mean, rt_se, size_mean, size_se, rt_max, size_max, executed)
