"""Probabilistic integer programs: distributions, transitions and structural queries."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Union

from .arith import Constraint, Polynomial, eval_poly
from .bounds import Bound, overapprox


class SimulationFault(RuntimeError):
    """A distribution was instantiated with invalid parameters at runtime."""


class UnsupportedDistribution(ValueError):
    pass


def _int_value(p: Polynomial, s: Mapping[str, int]) -> int:
    v = eval_poly(p, s)
    if v.denominator != 1:
        raise SimulationFault(f"parameter {p} is not integral at {dict(s)}")
    return int(v)


def _check_prob(p: Fraction) -> None:
    if not 0 < p <= 1:
        raise ValueError(f"probability parameter {p} outside (0, 1]")


@dataclass(frozen=True)
class Bernoulli:
    p: Fraction

    def __post_init__(self) -> None:
        _check_prob(self.p)

    def params(self) -> tuple[Polynomial, ...]:
        return ()

    def __str__(self) -> str:
        return f"BERN({self.p})"


@dataclass(frozen=True)
class Uniform:
    a: Polynomial
    b: Polynomial

    def params(self) -> tuple[Polynomial, ...]:
        return (self.a, self.b)

    def __str__(self) -> str:
        return f"UNIF({self.a}, {self.b})"


@dataclass(frozen=True)
class Geometric:
    p: Fraction

    def __post_init__(self) -> None:
        _check_prob(self.p)

    def params(self) -> tuple[Polynomial, ...]:
        return ()

    def __str__(self) -> str:
        return f"GEO({self.p})"


@dataclass(frozen=True)
class Binomial:
    n: Polynomial
    p: Fraction

    def __post_init__(self) -> None:
        _check_prob(self.p)

    def params(self) -> tuple[Polynomial, ...]:
        return (self.n,)

    def __str__(self) -> str:
        return f"BINOM({self.n}, {self.p})"


@dataclass(frozen=True)
class Hypergeometric:
    N: Polynomial
    K: Polynomial
    n: Polynomial

    def __post_init__(self) -> None:
        if not self.N.is_constant() or self.N.constant_term <= 0:
            raise UnsupportedDistribution("hypergeometric population size must be a positive constant")

    def params(self) -> tuple[Polynomial, ...]:
        return (self.N, self.K, self.n)

    def __str__(self) -> str:
        return f"HYPER({self.N}, {self.K}, {self.n})"


Distribution = Union[Bernoulli, Uniform, Geometric, Binomial, Hypergeometric]
UpdateRhs = Union[Polynomial, Distribution]
DISTRIBUTIONS = (Bernoulli, Uniform, Geometric, Binomial, Hypergeometric)


def is_dist(rhs: UpdateRhs) -> bool:
    return isinstance(rhs, DISTRIBUTIONS)


def dist_expected(d: Distribution) -> Polynomial:
    """Expected value of the sampled (added) quantity."""
    if isinstance(d, Bernoulli):
        return Polynomial.const(d.p)
    if isinstance(d, Uniform):
        return (d.a + d.b) * Fraction(1, 2)
    if isinstance(d, Geometric):
        return Polynomial.const(1 / d.p)
    if isinstance(d, Binomial):
        return d.n * d.p
    if isinstance(d, Hypergeometric):
        return d.n * d.K * (1 / d.N.constant_term)
    raise TypeError(d)


def dist_abs_bound(d: Distribution) -> Bound:
    """Bound on the expected absolute value of a sample, over the pre-state."""
    if isinstance(d, Bernoulli):
        return Bound.const(d.p)
    if isinstance(d, Uniform):
        return overapprox(d.a) + overapprox(d.b)
    if isinstance(d, Geometric):
        return Bound.const(1 / d.p)
    if isinstance(d, Binomial):
        return overapprox(d.n) * d.p
    if isinstance(d, Hypergeometric):
        return overapprox(d.n)
    raise TypeError(d)


def dist_support(d: Distribution, u: str) -> list[Polynomial]:
    """Atoms ``p >= 0`` describing (a superset of) the support of ``d`` for a sample ``u``."""
    U = Polynomial.var(u)
    if isinstance(d, Bernoulli):
        return [U, 1 - U]
    if isinstance(d, Uniform):
        return [U - d.a, d.b - U]
    if isinstance(d, Geometric):
        return [U - 1]
    if isinstance(d, (Binomial, Hypergeometric)):
        return [U, d.n - U]
    raise TypeError(d)


def dist_sample(d: Distribution, s: Mapping[str, int], rng: random.Random) -> int:
    """Draw one sample with parameters evaluated at ``s``."""
    if isinstance(d, Bernoulli):
        return 1 if rng.random() < d.p else 0
    if isinstance(d, Uniform):
        a, b = _int_value(d.a, s), _int_value(d.b, s)
        if a > b:
            raise SimulationFault(f"UNIF({a}, {b}) is empty")
        return rng.randint(a, b)
    if isinstance(d, Geometric):
        return geometric_sample(d.p, rng)
    if isinstance(d, Binomial):
        n = _int_value(d.n, s)
        if n < 0:
            raise SimulationFault(f"BINOM with n = {n}")
        return sum(1 for _ in range(n) if rng.random() < d.p)
    if isinstance(d, Hypergeometric):
        N, K, n = (_int_value(q, s) for q in (d.N, d.K, d.n))
        if not (0 <= K <= N and 0 <= n <= N):
            raise SimulationFault(f"HYPER({N}, {K}, {n}) is invalid")
        good, total, hits = K, N, 0
        for _ in range(n):
            if rng.randrange(total) < good:
                hits += 1
                good -= 1
            total -= 1
        return hits
    raise TypeError(d)


def geometric_sample(p: Fraction, rng: random.Random) -> int:
    """Inverse-CDF sample on {1, 2, ...} from a 64-bit uniform."""
    if p == 1:
        return 1
    u = (rng.getrandbits(64) + 0.5) / 2.0**64
    return max(1, math.ceil(math.log1p(-u) / math.log1p(-float(p))))


@dataclass(frozen=True)
class Transition:
    id: str
    source: str
    prob: Fraction
    guard: Constraint
    update: tuple[tuple[str, UpdateRhs], ...]
    target: str
    cost: Fraction = Fraction(1)

    def rhs(self, x: str) -> UpdateRhs:
        for v, r in self.update:
            if v == x:
                return r
        return Polynomial.var(x)

    def update_map(self) -> dict[str, UpdateRhs]:
        return dict(self.update)

    def has_dist(self) -> bool:
        return any(is_dist(r) for _, r in self.update)

    def vars(self) -> frozenset[str]:
        out = set(self.guard.vars())
        for v, r in self.update:
            out.add(v)
            if isinstance(r, Polynomial):
                out |= r.vars()
            else:
                for q in r.params():
                    out |= q.vars()
        return frozenset(out)


@dataclass(frozen=True)
class GeneralTransition:
    id: str
    members: tuple[Transition, ...]

    @property
    def source(self) -> str:
        return self.members[0].source

    @property
    def guard(self) -> Constraint:
        return self.members[0].guard

    @property
    def cost(self) -> Fraction:
        return self.members[0].cost

    def targets(self) -> tuple[str, ...]:
        seen: list[str] = []
        for t in self.members:
            if t.target not in seen:
                seen.append(t.target)
        return tuple(seen)

    def is_deterministic(self) -> bool:
        """Single member without sampling: the successor is fixed by the scheduler."""
        return len(self.members) == 1 and not self.members[0].has_dist()


class GRV(NamedTuple):
    g: str
    loc: str
    var: str

    def __str__(self) -> str:
        return f"({self.g}, {self.loc}, {self.var})"


@dataclass(frozen=True)
class PIP:
    pv: tuple[str, ...]
    locations: tuple[str, ...]
    general_transitions: tuple[GeneralTransition, ...]
    initial: str
    _index: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    # lookups ----------------------------------------------------------------
    def gt(self, gid: str) -> GeneralTransition:
        if "gt" not in self._index:
            self._index["gt"] = {g.id: g for g in self.general_transitions}
        return self._index["gt"][gid]

    def transitions(self) -> list[Transition]:
        return [t for g in self.general_transitions for t in g.members]

    def transition(self, tid: str) -> Transition:
        if "t" not in self._index:
            self._index["t"] = {t.id: t for t in self.transitions()}
        return self._index["t"][tid]

    def gt_of(self, tid: str) -> GeneralTransition:
        if "owner" not in self._index:
            self._index["owner"] = {t.id: g for g in self.general_transitions for t in g.members}
        return self._index["owner"][tid]

    def temporaries(self) -> tuple[str, ...]:
        out: set[str] = set()
        for t in self.transitions():
            out |= t.vars()
        return tuple(sorted(out - set(self.pv)))

    def grvs(self) -> list[GRV]:
        return [GRV(g.id, loc, x) for g in self.general_transitions for loc in g.targets() for x in self.pv]

    def with_transitions(self, gts: Iterable[GeneralTransition], locations: Iterable[str] | None = None) -> PIP:
        gts = tuple(gts)
        locs = tuple(locations) if locations is not None else self.locations
        return PIP(self.pv, locs, gts, self.initial)


def validate(p: PIP) -> list[str]:
    """Structural diagnostics; an empty list means the program is well formed."""
    errors: list[str] = []
    locs = set(p.locations)
    known = set(p.pv)
    if p.initial not in locs:
        errors.append(f"initial location {p.initial} is not declared")
    seen_g: set[str] = set()
    seen_t: set[str] = set()
    for g in p.general_transitions:
        if g.id in seen_g:
            errors.append(f"{g.id}: duplicate general transition id")
        seen_g.add(g.id)
        if not g.members:
            errors.append(f"{g.id}: general transition has no members")
            continue
        total = sum((t.prob for t in g.members), Fraction(0))
        if total != 1:
            errors.append(f"{g.id}: probabilities sum to {total}")
        for t in g.members:
            if t.id in seen_t:
                errors.append(f"{t.id}: duplicate transition id")
            seen_t.add(t.id)
            if t.source != g.source:
                errors.append(f"{g.id}: members have different start locations")
            if t.guard != g.guard:
                errors.append(f"{g.id}: members have different guards")
            if t.cost != g.cost:
                errors.append(f"{g.id}: members have different costs")
            if t.cost < 0:
                errors.append(f"{t.id}: negative cost")
            if not 0 <= t.prob <= 1:
                errors.append(f"{t.id}: probability {t.prob} outside [0, 1]")
            for loc in (t.source, t.target):
                if loc not in locs:
                    errors.append(f"{t.id}: undeclared location {loc}")
            if t.target == p.initial:
                errors.append(f"{t.id}: initial location has incoming transition")
            for v, _ in t.update:
                if v not in known:
                    errors.append(f"{t.id}: update of undeclared program variable {v}")
    return errors


# structural queries ----------------------------------------------------------
def pre_transitions(p: PIP, g: GeneralTransition) -> frozenset[GeneralTransition]:
    """General transitions with a member ending in the start location of ``g``."""
    return frozenset(h for h in p.general_transitions if g.source in h.targets())


def incoming(p: PIP, loc: str, exclude: Iterable[str] = ()) -> list[GeneralTransition]:
    ex = set(exclude)
    return [h for h in p.general_transitions if h.id not in ex and loc in h.targets()]


def entry(p: PIP, gtni: Iterable[GeneralTransition | str]) -> dict[str, frozenset[GeneralTransition]]:
    """Entry locations of ``gtni`` mapped to their entry general transitions."""
    ids = {g if isinstance(g, str) else g.id for g in gtni}
    out: dict[str, frozenset[GeneralTransition]] = {}
    for loc in start_locations(p, ids):
        ets = frozenset(incoming(p, loc, ids))
        if ets:
            out[loc] = ets
    return out


def start_locations(p: PIP, ids: Iterable[str]) -> list[str]:
    locs: list[str] = []
    for gid in sorted(ids, key=_gt_order(p)):
        s = p.gt(gid).source
        if s not in locs:
            locs.append(s)
    return locs


def _gt_order(p: PIP):
    pos = {g.id: i for i, g in enumerate(p.general_transitions)}
    return lambda gid: pos.get(gid, len(pos))


def location_graph(p: PIP) -> dict[str, list[str]]:
    succ: dict[str, list[str]] = {loc: [] for loc in p.locations}
    for g in p.general_transitions:
        for loc in g.targets():
            if loc not in succ[g.source]:
                succ[g.source].append(loc)
    return succ


def abstract_nonprob(p: PIP) -> PIP:
    """Split every general transition and replace sampling by temporaries.

    A sampled update ``x = d`` becomes ``x = x + u`` for a fresh temporary
    ``u`` whose support constraints join the guard. Each member keeps its
    transition id and becomes a singleton general transition with the same id.
    """
    gts: list[GeneralTransition] = []
    for g in p.general_transitions:
        for t in g.members:
            guard = t.guard
            update: list[tuple[str, UpdateRhs]] = []
            for x, rhs in t.update:
                if is_dist(rhs):
                    u = f"_{t.id}_{x}"
                    guard = guard.conjoin(a for a in dist_support(rhs, u) if a.is_linear())
                    update.append((x, Polynomial.var(x) + Polynomial.var(u)))
                else:
                    update.append((x, rhs))
            nt = replace(t, prob=Fraction(1), guard=guard, update=tuple(update))
            gts.append(GeneralTransition(t.id, (nt,)))
    return PIP(p.pv, p.locations, tuple(gts), p.initial)
