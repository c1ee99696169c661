"""Bound algebra: nonnegative polynomials, constant-base exponentials and infinity.

A ``Bound`` is kept in a canonical sum-of-products form. Each term is a
positive rational coefficient times a product of *generators*, where a
generator is a program variable or an exponential ``base^(exponent)`` with a
constant base ``>= 1`` and a bound as exponent. A coefficient may be infinite:
``inf*y`` is infinite unless ``y = 0``, since ``0 * inf = 0``. An infinite
constant term absorbs the whole bound into ``INF``.

Raw expression trees (``Sum``, ``Prod``, ``Exp`` over variables, numbers,
``INF`` and bounds) can be built directly and normalised with ``simplify``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Mapping, Union

from .arith import Number, Polynomial, fmt_rational, mono_key

Generator = Union[str, "ExpAtom"]
Key = tuple[tuple[Generator, int], ...]


@dataclass(frozen=True)
class ExpAtom:
    base: Fraction
    exponent: "Bound"

    def sort_key(self) -> str:
        return f"{fmt_rational(self.base)}^({self.exponent})"


def _gen_key(g: Generator) -> tuple:
    return (0, g) if isinstance(g, str) else (1, g.sort_key())


def _key_mul(a: Key, b: Key) -> Key:
    if not a:
        return b
    if not b:
        return a
    exps: dict[Generator, int] = dict(a)
    for g, k in b:
        exps[g] = exps.get(g, 0) + k
    return tuple(sorted(exps.items(), key=lambda gk: _gen_key(gk[0])))


def _key_degree(k: Key) -> int:
    return sum(e for g, e in k if isinstance(g, str))


def _key_has_exp(k: Key) -> bool:
    return any(not isinstance(g, str) for g, _ in k)


class Bound:
    """Canonical bound; immutable."""

    __slots__ = ("_terms", "_inf", "_hash")

    def __init__(self, terms: Mapping[Key, Fraction] | None = None, inf: bool = False):
        if inf or (terms and terms.get(()) == math.inf):
            terms = {(): math.inf}
        self._terms: dict[Key, Fraction] = dict(terms) if terms else {}
        self._inf = bool(self._terms) and self._terms.get(()) == math.inf
        self._hash: int | None = None

    # construction -----------------------------------------------------------
    @classmethod
    def const(cls, c: Number) -> Bound:
        if c == math.inf:
            return INF
        c = Fraction(c)
        if c < 0:
            raise ValueError("bounds are nonnegative")
        return cls({(): c}) if c else ZERO

    @classmethod
    def var(cls, name: str) -> Bound:
        return cls({((name, 1),): Fraction(1)})

    @classmethod
    def exp(cls, base: Number, exponent: Bound) -> Bound:
        base = Fraction(base)
        if base < 1:
            raise ValueError("exponential base must be at least 1")
        if base == 1 or exponent.is_zero():
            return ONE_B
        if exponent.is_inf:
            return INF
        if exponent.is_constant():
            c = exponent.constant_value()
            if c.denominator == 1:
                return cls.const(base ** c.numerator)
        return cls({((ExpAtom(base, exponent), 1),): Fraction(1)})

    @staticmethod
    def lift(x: Bound | Number | str) -> Bound:
        if isinstance(x, Bound):
            return x
        if isinstance(x, str):
            return Bound.var(x)
        return Bound.const(x)

    # queries ----------------------------------------------------------------
    @property
    def is_inf(self) -> bool:
        return self._inf

    @property
    def is_finite(self) -> bool:
        for k, c in self._terms.items():
            if c == math.inf or any(not isinstance(g, str) and not g.exponent.is_finite for g, _ in k):
                return False
        return True

    @property
    def terms(self) -> Mapping[Key, Fraction]:
        return self._terms

    def is_zero(self) -> bool:
        return not self._inf and not self._terms

    def is_constant(self) -> bool:
        return self.is_finite and all(not k for k in self._terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("bound is not constant")
        return self._terms.get((), Fraction(0))

    def vars(self) -> frozenset[str]:
        out: set[str] = set()
        for k in self._terms:
            for g, _ in k:
                if isinstance(g, str):
                    out.add(g)
                else:
                    out |= g.exponent.vars()
        return frozenset(out)

    def degree(self) -> int:
        return max((_key_degree(k) for k in self._terms), default=0)

    def monomial_count(self) -> int:
        return len(self._terms)

    def coefficient_sum(self) -> Fraction:
        return sum(self._terms.values(), Fraction(0))

    def has_exp(self) -> bool:
        return any(_key_has_exp(k) for k in self._terms)

    # arithmetic -------------------------------------------------------------
    def __add__(self, other: Bound | Number | str) -> Bound:
        other = Bound.lift(other)
        if self._inf or other._inf:
            return INF
        if not other._terms:
            return self
        if not self._terms:
            return other
        acc = dict(self._terms)
        for k, c in other._terms.items():
            acc[k] = acc.get(k, Fraction(0)) + c
        return Bound(acc)

    __radd__ = __add__

    def __mul__(self, other: Bound | Number | str) -> Bound:
        other = Bound.lift(other)
        if self.is_zero() or other.is_zero():
            return ZERO
        if self._inf and other._inf:
            return INF
        acc: dict[Key, Fraction] = {}
        for k1, c1 in self._terms.items():
            for k2, c2 in other._terms.items():
                k = _key_mul(k1, k2)
                acc[k] = acc.get(k, Fraction(0)) + c1 * c2
        return Bound(_merge_exps(acc))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> Bound:
        out = ONE_B
        for _ in range(n):
            out = out * self
        return out

    def substitute(self, sigma: Mapping[str, Bound]) -> Bound:
        return substitute_bound(self, sigma)

    def evaluate(self, s: Mapping[str, Number]) -> Fraction | float:
        return eval_bound(self, s)

    # comparison / printing --------------------------------------------------
    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Bound.const(other)
        if not isinstance(other, Bound):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"Bound({str(self)!r})"

    def __str__(self) -> str:
        if self._inf:
            return "inf"
        if not self._terms:
            return "0"
        parts = []
        for k, c in sorted(self._terms.items(), key=lambda kv: _print_key(kv[0])):
            factors = []
            for g, e in k:
                if isinstance(g, str):
                    factors.append(g if e == 1 else f"{g}^{e}")
                else:
                    atom = f"{fmt_rational(g.base)}^({g.exponent})"
                    factors.append(atom if e == 1 else f"({atom})^{e}")
            coeff = "inf" if c == math.inf else fmt_rational(c)
            if not factors:
                parts.append(coeff)
            elif c == 1:
                parts.append("*".join(factors))
            else:
                parts.append(coeff + "*" + "*".join(factors))
        return " + ".join(parts)


def _print_key(k: Key) -> tuple:
    # exponential terms first, then graded-lex order on the polynomial part
    poly = tuple((g, e) for g, e in k if isinstance(g, str))
    exps = tuple(g.sort_key() for g, _ in k if not isinstance(g, str))
    return (0 if exps else 1, exps, mono_key(poly))


def _merge_exps(acc: Mapping[Key, Fraction]) -> dict[Key, Fraction]:
    """Combine exponential generators with equal base inside each term."""
    out: dict[Key, Fraction] = {}
    for k, c in acc.items():
        if _key_has_exp(k):
            by_base: dict[Fraction, Bound] = {}
            rest: list[tuple[Generator, int]] = []
            for g, e in k:
                if isinstance(g, str):
                    rest.append((g, e))
                else:
                    by_base[g.base] = by_base.get(g.base, ZERO) + g.exponent * e
            for base in sorted(by_base):
                expo = by_base[base]
                if expo.is_inf:
                    c = math.inf
                elif expo.is_constant() and expo.constant_value().denominator == 1:
                    c = c * base ** expo.constant_value().numerator
                else:
                    rest.append((ExpAtom(base, expo), 1))
            k = tuple(sorted(rest, key=lambda gk: _gen_key(gk[0])))
        if c:
            out[k] = out.get(k, Fraction(0)) + c
    return out


ZERO = Bound()
ONE_B = Bound({(): Fraction(1)})
INF = Bound(inf=True)


# --- raw expression trees -----------------------------------------------------
@dataclass(frozen=True)
class Sum:
    args: tuple


@dataclass(frozen=True)
class Prod:
    args: tuple


@dataclass(frozen=True)
class Exp:
    base: Fraction
    exponent: object


class _Infinity:
    def __repr__(self) -> str:
        return "INF"


RAW_INF = _Infinity()
Expr = Union[Bound, Sum, Prod, Exp, str, int, Fraction, _Infinity]


def simplify(e: Expr) -> Bound:
    """Normalise a raw bound expression (or re-normalise a bound)."""
    if isinstance(e, Bound):
        return e
    if e is RAW_INF:
        return INF
    if isinstance(e, str):
        return Bound.var(e)
    if isinstance(e, (int, Fraction)):
        return Bound.const(e)
    if isinstance(e, Sum):
        out = ZERO
        for a in e.args:
            out = out + simplify(a)
        return out
    if isinstance(e, Prod):
        parts = [simplify(a) for a in e.args]
        if any(p.is_zero() for p in parts):
            return ZERO
        out = ONE_B
        for p in parts:
            out = out * p
        return out
    if isinstance(e, Exp):
        return Bound.exp(e.base, simplify(e.exponent))
    raise TypeError(f"not a bound expression: {e!r}")


def substitute_bound(b: Bound, sigma: Mapping[str, Bound]) -> Bound:
    """Simultaneous substitution of program variables by bounds."""
    if b.is_inf:
        return INF
    out = ZERO
    for k, c in b.terms.items():
        term = Bound({(): c})
        for g, e in k:
            if isinstance(g, str):
                image = sigma.get(g)
                factor = image if image is not None else Bound.var(g)
            else:
                factor = Bound.exp(g.base, substitute_bound(g.exponent, sigma))
            term = term * (factor ** e)
        out = out + term
    return out


def overapprox(p: Polynomial, allowed: Iterable[str] | None = None) -> Bound:
    """Replace every coefficient of ``p`` by its absolute value."""
    if allowed is not None:
        extra = p.vars() - frozenset(allowed)
        if extra:
            raise ValueError(f"temporary variables in bound: {sorted(extra)}")
    return Bound({tuple(m): abs(c) for m, c in p.terms.items()})


def is_linear(b: Bound) -> bool:
    """Finite, total degree at most one, and exponentials only with constant exponents."""
    if not b.is_finite or b.degree() > 1:
        return False
    return all(isinstance(g, str) or not g.exponent.vars() for k in b.terms for g, _ in k)


def _abs_state(s: Mapping[str, Number]) -> dict[str, Fraction]:
    return {v: abs(Fraction(x)) for v, x in s.items()}


def eval_bound(b: Expr, s: Mapping[str, Number]) -> Fraction | float:
    """Value of a bound (or raw expression) at ``|s|``; ``math.inf`` for infinity."""
    return _eval(b, _abs_state(s))


def _mul_ext(a, b):
    if a == 0 or b == 0:
        return Fraction(0)
    return a * b


def _pow_ext(base: Fraction, e):
    if base == 1:
        return Fraction(1)
    if e == math.inf:
        return math.inf
    if isinstance(e, Fraction) and e.denominator == 1:
        return base ** e.numerator
    return float(base) ** float(e)


def _eval(e: Expr, s: Mapping[str, Fraction]):
    if isinstance(e, Bound):
        if e.is_inf:
            return math.inf
        total = Fraction(0)
        for k, c in e.terms.items():
            term = c
            for g, n in k:
                if isinstance(g, str):
                    term = _mul_ext(term, s[g] ** n)
                else:
                    term = _mul_ext(term, _pow_ext(g.base, _eval(g.exponent, s)) ** n)
            total = total + term
        return total
    if e is RAW_INF:
        return math.inf
    if isinstance(e, str):
        return s[e]
    if isinstance(e, (int, Fraction)):
        return Fraction(e)
    if isinstance(e, Sum):
        total = Fraction(0)
        for a in e.args:
            total = total + _eval(a, s)
        return total
    if isinstance(e, Prod):
        out = Fraction(1)
        for a in e.args:
            out = _mul_ext(out, _eval(a, s))
        return out
    if isinstance(e, Exp):
        return _pow_ext(Fraction(e.base), _eval(e.exponent, s))
    raise TypeError(f"not a bound expression: {e!r}")


@total_ordering
@dataclass(frozen=True)
class AsymptoticClass:
    """Const < Poly(1) < Poly(2) < ... < Exp < Infinite."""

    rank: int
    degree: int = 0

    def __lt__(self, other: AsymptoticClass) -> bool:
        return (self.rank, self.degree) < (other.rank, other.degree)

    def __str__(self) -> str:
        if self.rank == 0:
            return "O(1)"
        if self.rank == 1:
            return "O(n)" if self.degree == 1 else f"O(n^{self.degree})"
        return "EXP" if self.rank == 2 else "INF"

    @property
    def name(self) -> str:
        return ("Const", f"Poly({self.degree})", "Exp", "Infinite")[self.rank]


CONST = AsymptoticClass(0)
EXP = AsymptoticClass(2)
INFINITE = AsymptoticClass(3)


def Poly(k: int) -> AsymptoticClass:  # noqa: N802 - mirrors the class tag
    return CONST if k == 0 else AsymptoticClass(1, k)


def asymptotic_class(b: Bound) -> AsymptoticClass:
    if not b.is_finite:
        return INFINITE
    for k in b.terms:
        for g, _ in k:
            if not isinstance(g, str) and g.exponent.vars():
                return EXP
    return Poly(b.degree())


def prefer(old: Bound, new: Bound) -> Bound:
    """Pick the better of two sound bounds; ties keep ``old``."""

    def key(b: Bound):
        return (asymptotic_class(b), b.monomial_count(), b.coefficient_sum())

    return new if key(new) < key(old) else old
