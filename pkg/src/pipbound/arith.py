"""Exact multivariate polynomials and linear constraints over the rationals."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

Number = Union[int, Fraction]
# A monomial is a tuple of (variable, exponent) pairs sorted by variable name,
# with every exponent positive. The empty tuple is the constant monomial.
Monomial = tuple[tuple[str, int], ...]
State = Mapping[str, int]

ONE: Monomial = ()


class ConfigurationError(ValueError):
    """Raised when a state does not assign a variable an expression needs."""


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    exps = dict(a)
    for v, k in b:
        exps[v] = exps.get(v, 0) + k
    return tuple(sorted(exps.items()))


def mono_degree(m: Monomial) -> int:
    return sum(k for _, k in m)


def mono_key(m: Monomial) -> tuple:
    """Sort key realising graded lexicographic order (x > y, higher degree first)."""
    flat = tuple(v for v, k in m for _ in range(k))
    return (-len(flat), flat)


def mono_str(m: Monomial) -> str:
    return "*".join(v if k == 1 else f"{v}^{k}" for v, k in m)


def _frac(c: Number) -> Fraction:
    return c if isinstance(c, Fraction) else Fraction(c)


def fmt_rational(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


class Polynomial:
    """Immutable polynomial with rational coefficients; no zero terms are stored."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Number] | Iterable[tuple[Monomial, Number]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Monomial, Fraction] = {}
        for m, c in items:
            if c:
                acc[m] = acc.get(m, Fraction(0)) + _frac(c)
        self._terms = {m: c for m, c in acc.items() if c}
        self._hash: int | None = None

    @classmethod
    def const(cls, c: Number) -> Polynomial:
        return cls({ONE: c})

    @classmethod
    def var(cls, name: str) -> Polynomial:
        return cls({((name, 1),): 1})

    @classmethod
    def linear(cls, coeffs: Mapping[str, Number], const: Number = 0) -> Polynomial:
        terms: dict[Monomial, Number] = {((v, 1),): c for v, c in coeffs.items()}
        terms[ONE] = const
        return cls(terms)

    @staticmethod
    def lift(x: Polynomial | Number) -> Polynomial:
        return x if isinstance(x, Polynomial) else Polynomial.const(x)

    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return self._terms

    def __iter__(self) -> Iterator[tuple[Monomial, Fraction]]:
        return iter(sorted(self._terms.items(), key=lambda kv: mono_key(kv[0])))

    def coeff(self, m: Monomial) -> Fraction:
        return self._terms.get(m, Fraction(0))

    def linear_coeff(self, v: str) -> Fraction:
        return self.coeff(((v, 1),))

    @property
    def constant_term(self) -> Fraction:
        return self.coeff(ONE)

    def vars(self) -> frozenset[str]:
        return frozenset(v for m in self._terms for v, _ in m)

    def degree(self) -> int:
        return max((mono_degree(m) for m in self._terms), default=0)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not m for m in self._terms)

    def is_linear(self) -> bool:
        return self.degree() <= 1

    def __add__(self, other: Polynomial | Number) -> Polynomial:
        other = Polynomial.lift(other)
        return Polynomial(list(self._terms.items()) + list(other._terms.items()))

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial({m: -c for m, c in self._terms.items()})

    def __sub__(self, other: Polynomial | Number) -> Polynomial:
        return self + (-Polynomial.lift(other))

    def __rsub__(self, other: Number) -> Polynomial:
        return Polynomial.lift(other) - self

    def __mul__(self, other: Polynomial | Number) -> Polynomial:
        if not isinstance(other, Polynomial):
            c = _frac(other)
            return Polynomial({m: c * v for m, v in self._terms.items()})
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = mono_mul(m1, m2)
                out[m] = out.get(m, Fraction(0)) + c1 * c2
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> Polynomial:
        if k < 0:
            raise ValueError("negative exponent")
        result = Polynomial.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial.const(other)
        return isinstance(other, Polynomial) and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"Polynomial({str(self)!r})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts: list[str] = []
        for m, c in self:
            neg = c < 0
            a = -c if neg else c
            if not m:
                body = fmt_rational(a)
            elif a == 1:
                body = mono_str(m)
            else:
                body = f"{fmt_rational(a)}*{mono_str(m)}"
            if not parts:
                parts.append(f"-{body}" if neg else body)
            else:
                parts.append(f"- {body}" if neg else f"+ {body}")
        return " ".join(parts)

    def evaluate(self, s: Mapping[str, Number]) -> Fraction:
        return eval_poly(self, s)

    def substitute(self, sigma: Mapping[str, Polynomial]) -> Polynomial:
        return substitute_poly(self, sigma)


def eval_poly(p: Polynomial, s: Mapping[str, Number]) -> Fraction:
    """Exact value of ``p`` at the assignment ``s``."""
    total = Fraction(0)
    for m, c in p.terms.items():
        term = c
        for v, k in m:
            try:
                term *= _frac(s[v]) ** k
            except KeyError:
                raise ConfigurationError(f"variable {v} is not assigned") from None
        total += term
    return total


def substitute_poly(p: Polynomial, sigma: Mapping[str, Polynomial]) -> Polynomial:
    """Simultaneous substitution; variables missing from ``sigma`` are kept."""
    out = Polynomial()
    for m, c in p.terms.items():
        term = Polynomial.const(c)
        for v, k in m:
            image = sigma.get(v)
            term = term * ((image if image is not None else Polynomial.var(v)) ** k)
        out = out + term
    return out


RELATIONS = ("<=", "<", ">=", ">", "=")


@dataclass(frozen=True)
class Comparison:
    lhs: Polynomial
    rel: str
    rhs: Polynomial

    def holds(self, s: Mapping[str, Number]) -> bool:
        a, b = eval_poly(self.lhs, s), eval_poly(self.rhs, s)
        return {"<=": a <= b, "<": a < b, ">=": a >= b, ">": a > b, "=": a == b}[self.rel]

    def __str__(self) -> str:
        return f"{self.lhs} {self.rel} {self.rhs}"


@dataclass(frozen=True)
class Constraint:
    """Conjunction of linear atoms ``p >= 0``.

    ``nonlinear`` keeps dropped nonlinear atoms (also as ``p >= 0``) so that
    concrete execution can still honour them; the analysis ignores them.
    """

    atoms: tuple[Polynomial, ...] = ()
    nonlinear: tuple[Polynomial, ...] = ()

    @property
    def weakened(self) -> bool:
        return bool(self.nonlinear)

    def vars(self) -> frozenset[str]:
        out: set[str] = set()
        for a in self.atoms + self.nonlinear:
            out |= a.vars()
        return frozenset(out)

    def holds(self, s: Mapping[str, Number]) -> bool:
        return all(eval_poly(a, s) >= 0 for a in self.atoms + self.nonlinear)

    def conjoin(self, atoms: Iterable[Polynomial]) -> Constraint:
        new = list(self.atoms)
        for a in atoms:
            a = _tighten(a)
            if a in new:
                continue
            # atoms differing only in the constant: keep the stronger one in place
            head = a - a.constant_term
            for i, b in enumerate(new):
                if b.is_linear() and b - b.constant_term == head:
                    if a.constant_term < b.constant_term:
                        new[i] = a
                    break
            else:
                new.append(a)
        return Constraint(tuple(new), self.nonlinear)

    def __str__(self) -> str:
        parts = [f"{a} >= 0" for a in self.atoms + self.nonlinear]
        return " && ".join(parts) if parts else "true"


def _integral(p: Polynomial) -> Polynomial:
    """Scale ``p`` by a positive factor so that all coefficients are coprime integers."""
    if p.is_zero():
        return p
    lcm = 1
    for c in p.terms.values():
        lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
    scaled = p * lcm
    g = 0
    for c in scaled.terms.values():
        g = math.gcd(g, int(c))
    return scaled * Fraction(1, g) if g > 1 else scaled


def _tighten(p: Polynomial) -> Polynomial:
    """Integer tightening of a linear atom ``p >= 0``.

    With integer variable coefficients of gcd ``g``, the atom is equivalent over
    the integers to ``(sum)/g + floor(c/g) >= 0``.
    """
    if p.is_zero() or not p.is_linear():
        return p
    p = _integral(p)
    g = 0
    for m, c in p.terms.items():
        if m:
            g = math.gcd(g, int(c))
    if g <= 1:
        return p
    c0 = p.constant_term
    return Polynomial({m: c / g for m, c in p.terms.items() if m}) + (c0 // g)


def normalize_constraint(comparisons: Iterable[Comparison]) -> Constraint:
    """Rewrite comparisons into integer-tight atoms ``p >= 0``.

    Strict relations are shifted by one after scaling to integer coefficients,
    equalities become two atoms, and nonlinear atoms are kept aside.
    """
    atoms: list[Polynomial] = []
    nonlinear: list[Polynomial] = []

    def add(p: Polynomial, strict: bool) -> None:
        if p.is_linear():
            p = _integral(p)
            if strict:
                p = p - 1
            p = _tighten(p)
            if p not in atoms:
                atoms.append(p)
        else:
            p = _integral(p)
            if strict:
                p = p - 1
            if p not in nonlinear:
                nonlinear.append(p)

    for c in comparisons:
        diff = c.rhs - c.lhs  # rhs - lhs
        if c.rel == "<=":
            add(diff, False)
        elif c.rel == "<":
            add(diff, True)
        elif c.rel == ">=":
            add(-diff, False)
        elif c.rel == ">":
            add(-diff, True)
        elif c.rel == "=":
            add(diff, False)
            add(-diff, False)
        else:
            raise ValueError(f"unknown relation {c.rel}")
    return Constraint(tuple(atoms), tuple(nonlinear))
