"""Exact rational linear programming with a sparse two-phase simplex (Bland's rule)."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

ZERO = Fraction(0)


class LinExpr:
    """Affine expression ``sum c_i * u_i + const`` over named unknowns."""

    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs: Mapping[str, Fraction | int] | None = None, const: Fraction | int = 0):
        self.coeffs: dict[str, Fraction] = {}
        if coeffs:
            for u, c in coeffs.items():
                if c:
                    self.coeffs[u] = Fraction(c)
        self.const = Fraction(const)

    @classmethod
    def unknown(cls, name: str) -> LinExpr:
        return cls({name: 1})

    @staticmethod
    def lift(x: LinExpr | Fraction | int) -> LinExpr:
        return x if isinstance(x, LinExpr) else LinExpr(const=x)

    def __add__(self, other: LinExpr | Fraction | int) -> LinExpr:
        other = LinExpr.lift(other)
        out = dict(self.coeffs)
        for u, c in other.coeffs.items():
            v = out.get(u, ZERO) + c
            if v:
                out[u] = v
            else:
                out.pop(u, None)
        return LinExpr(out, self.const + other.const)

    __radd__ = __add__

    def __neg__(self) -> LinExpr:
        return LinExpr({u: -c for u, c in self.coeffs.items()}, -self.const)

    def __sub__(self, other: LinExpr | Fraction | int) -> LinExpr:
        return self + (-LinExpr.lift(other))

    def __rsub__(self, other: Fraction | int) -> LinExpr:
        return LinExpr.lift(other) - self

    def __mul__(self, k: Fraction | int) -> LinExpr:
        if isinstance(k, LinExpr):
            raise TypeError("product of two affine expressions is not affine")
        k = Fraction(k)
        if not k:
            return LinExpr()
        return LinExpr({u: c * k for u, c in self.coeffs.items()}, self.const * k)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.coeffs and not self.const

    def evaluate(self, values: Mapping[str, Fraction]) -> Fraction:
        return self.const + sum((c * values.get(u, ZERO) for u, c in self.coeffs.items()), ZERO)

    def __repr__(self) -> str:
        parts = [f"{c}*{u}" for u, c in sorted(self.coeffs.items())]
        parts.append(str(self.const))
        return " + ".join(parts)


@dataclass
class LPProblem:
    """Constraints ``expr >= 0`` or ``expr == 0`` over unknowns.

    Unknowns are free unless declared nonnegative.
    """

    nonneg: set[str] = field(default_factory=set)
    free: set[str] = field(default_factory=set)
    constraints: list[tuple[LinExpr, str]] = field(default_factory=list)

    def add_unknown(self, name: str, nonneg: bool = False) -> LinExpr:
        (self.nonneg if nonneg else self.free).add(name)
        return LinExpr.unknown(name)

    def geq(self, e: LinExpr) -> None:
        self.constraints.append((e, ">="))

    def eq(self, e: LinExpr) -> None:
        self.constraints.append((e, "=="))

    def unknowns(self) -> list[str]:
        seen = set(self.nonneg) | set(self.free)
        for e, _ in self.constraints:
            seen |= set(e.coeffs)
        return sorted(seen)

    def check(self, values: Mapping[str, Fraction]) -> bool:
        """Exact re-check of an assignment."""
        for u in self.nonneg:
            if values.get(u, ZERO) < 0:
                return False
        for e, kind in self.constraints:
            v = e.evaluate(values)
            if (kind == ">=" and v < 0) or (kind == "==" and v != 0):
                return False
        return True


def lp_feasible(
    lp: LPProblem, minimize_abs: Mapping[str, Fraction | int] | None = None
) -> dict[str, Fraction] | None:
    """Exact feasible point of ``lp`` or ``None`` when infeasible.

    With ``minimize_abs`` the returned point additionally minimises
    ``sum w_u * |u|`` (all weights nonnegative).
    """
    names = lp.unknowns()
    # column layout: nonnegative unknowns use one column, free ones two (u = p - n)
    cols: dict[str, list[int]] = {}
    ncol = 0
    for u in names:
        if u in lp.nonneg and u not in lp.free:
            cols[u] = [ncol]
            ncol += 1
        else:
            cols[u] = [ncol, ncol + 1]
            ncol += 2
    rows: list[dict[int, Fraction]] = []
    rhs: list[Fraction] = []
    for e, kind in lp.constraints:
        row: dict[int, Fraction] = {}
        for u, c in e.coeffs.items():
            cs = cols[u]
            row[cs[0]] = row.get(cs[0], ZERO) + c
            if len(cs) == 2:
                row[cs[1]] = row.get(cs[1], ZERO) - c
        b = -e.const
        if kind == ">=":
            row[ncol] = Fraction(-1)  # surplus
            ncol += 1
        row = {j: v for j, v in row.items() if v}
        if b < 0:
            row = {j: -v for j, v in row.items()}
            b = -b
        if not row:
            if b != 0:
                return None
            continue
        rows.append(row)
        rhs.append(b)

    tab = _Tableau(rows, rhs, ncol)
    if not tab.phase_one():
        return None
    if minimize_abs:
        cost: dict[int, Fraction] = {}
        for u, w in minimize_abs.items():
            if u in cols and w:
                for j in cols[u]:
                    cost[j] = Fraction(w)
        tab.phase_two(cost)
    x = tab.solution()
    out: dict[str, Fraction] = {}
    for u in names:
        cs = cols[u]
        v = x.get(cs[0], ZERO)
        if len(cs) == 2:
            v -= x.get(cs[1], ZERO)
        out[u] = v
    return out


class _Tableau:
    """Sparse tableau for ``A x = b, x >= 0`` with artificial start basis."""

    def __init__(self, rows: list[dict[int, Fraction]], rhs: list[Fraction], nstruct: int):
        self.rows = [dict(r) for r in rows]
        self.rhs = list(rhs)
        self.nstruct = nstruct
        m = len(rows)
        self.art = list(range(nstruct, nstruct + m))
        for i, a in enumerate(self.art):
            self.rows[i][a] = Fraction(1)
        self.basis = list(self.art)
        self.ncols = nstruct + m

    def _pivot(self, r: int, c: int, obj: dict[int, Fraction], obj_val: list[Fraction]) -> None:
        row = self.rows[r]
        piv = row[c]
        if piv != 1:
            inv = 1 / piv
            for j in row:
                row[j] *= inv
            self.rhs[r] *= inv
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other.get(c)
            if f:
                for j, v in row.items():
                    nv = other.get(j, ZERO) - f * v
                    if nv:
                        other[j] = nv
                    else:
                        other.pop(j, None)
                self.rhs[i] -= f * self.rhs[r]
        f = obj.get(c)
        if f:
            for j, v in row.items():
                nv = obj.get(j, ZERO) - f * v
                if nv:
                    obj[j] = nv
                else:
                    obj.pop(j, None)
            obj_val[0] -= f * self.rhs[r]
        self.basis[r] = c

    def _run(self, obj: dict[int, Fraction], obj_val: list[Fraction], allowed) -> bool:
        """Minimise the reduced objective; False if unbounded."""
        while True:
            entering = None
            for j in sorted(obj):
                if obj[j] < 0 and allowed(j):
                    entering = j
                    break
            if entering is None:
                return True
            best = None
            for i, row in enumerate(self.rows):
                a = row.get(entering)
                if a is not None and a > 0:
                    ratio = self.rhs[i] / a
                    if best is None or ratio < best[0] or (ratio == best[0] and self.basis[i] < self.basis[best[1]]):
                        best = (ratio, i)
            if best is None:
                return False
            self._pivot(best[1], entering, obj, obj_val)

    def _reduced(self, cost: Mapping[int, Fraction]) -> tuple[dict[int, Fraction], list[Fraction]]:
        obj = {j: c for j, c in cost.items() if c}
        val = [ZERO]
        for i, b in enumerate(self.basis):
            cb = cost.get(b, ZERO)
            if cb:
                for j, v in self.rows[i].items():
                    nv = obj.get(j, ZERO) - cb * v
                    if nv:
                        obj[j] = nv
                    else:
                        obj.pop(j, None)
                val[0] -= cb * self.rhs[i]
        return obj, val

    def phase_one(self) -> bool:
        art = set(self.art)
        obj, val = self._reduced({a: Fraction(1) for a in self.art})
        self._run(obj, val, lambda j: True)
        if any(self.rhs[i] != 0 for i, b in enumerate(self.basis) if b in art):
            return False
        # drive remaining zero-level artificials out of the basis
        keep = []
        for i, b in enumerate(self.basis):
            if b in art:
                col = next((j for j in sorted(self.rows[i]) if j not in art), None)
                if col is None:
                    continue  # redundant row
                self._pivot(i, col, {}, [ZERO])
            keep.append(i)
        self.rows = [self.rows[i] for i in keep]
        self.rhs = [self.rhs[i] for i in keep]
        self.basis = [self.basis[i] for i in keep]
        for row in self.rows:
            for a in art:
                row.pop(a, None)
        self.art_set = art
        return True

    def phase_two(self, cost: Mapping[int, Fraction]) -> None:
        obj, val = self._reduced(cost)
        self._run(obj, val, lambda j: j not in self.art_set)

    def solution(self) -> dict[int, Fraction]:
        return {b: self.rhs[i] for i, b in enumerate(self.basis) if b < self.nstruct}
