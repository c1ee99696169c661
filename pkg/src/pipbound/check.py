"""Dominance of computed bounds over simulated means."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .bounds import eval_bound
from .driver import AnalysisReport
from .pip import PIP
from .sim import SimStats

GRID_VALUES = (0, 1, 3, 10)


@dataclass(frozen=True)
class Violation:
    what: str
    bound: float
    mean: float
    se: float

    def __str__(self) -> str:
        return f"{self.what}: bound {self.bound:.6g} < mean {self.mean:.6g} - 4*SE ({self.se:.3g})"


def dominance_violations(report: AnalysisReport, stats: SimStats, s0: Mapping[str, int],
                         k: float = 4.0) -> list[Violation]:
    """Quantities whose bound at ``|s0|`` lies below the empirical mean minus ``k`` standard errors.

    General transitions removed by preprocessing have bound 0.
    """
    out: list[Violation] = []
    for gid, mean in stats.rt_mean.items():
        if math.isnan(mean):
            continue
        b = report.rt_e.get(gid)
        value = float(eval_bound(b, s0)) if b is not None else 0.0
        if value < mean - k * stats.rt_se[gid]:
            out.append(Violation(f"RT_E({gid})", value, mean, stats.rt_se[gid]))
    for a, mean in stats.size_mean.items():
        if math.isnan(mean):
            continue
        b = report.sz_e.get(a)
        value = float(eval_bound(b, s0)) if b is not None else 0.0
        if value < mean - k * stats.size_se[a]:
            out.append(Violation(f"S_E{a}", value, mean, stats.size_se[a]))
    return out


def state_grid(p: PIP, values: Sequence[int] = GRID_VALUES) -> Iterable[dict[str, int]]:
    for combo in itertools.product(values, repeat=len(p.pv)):
        yield dict(zip(p.pv, combo))


def parse_state(text: str, pv: Sequence[str]) -> dict[str, int]:
    """``k`` sets every variable to ``k``; ``x=1,y=2`` sets the named ones (others 0)."""
    text = text.strip()
    if "=" not in text:
        return {x: int(text) for x in pv}
    out = {x: 0 for x in pv}
    for part in text.split(","):
        name, _, value = part.partition("=")
        name = name.strip()
        if name not in out:
            raise ValueError(f"unknown program variable {name!r}")
        out[name] = int(value)
    return out
