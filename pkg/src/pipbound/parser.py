"""Reader and printer for the textual program format.

::

    vars x y
    start l0
    g1: l1 -> 1/2: l1(x = x-1, y = y+x) (+) 1/2: l1(y = y+x) :|: x > 0 {1}

The ``g1:`` label is optional; unlabeled rules are numbered ``g0, g1, ...``
in order of appearance and their members ``t0, t1, ...``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .arith import Comparison, Constraint, Polynomial, normalize_constraint
from .pip import (
    PIP,
    Bernoulli,
    Binomial,
    Distribution,
    GeneralTransition,
    Geometric,
    Hypergeometric,
    Transition,
    Uniform,
    UpdateRhs,
    UnsupportedDistribution,
    is_dist,
)


class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.msg, self.line, self.col = msg, line, col


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>(\#|//).*)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>\(\+\)|->|:\|:|&&|<=|>=|==|\*\*|[<>=+\-*/^(),:{}])
    """,
    re.VERBOSE,
)

_DISTS = {"UNIF", "GEO", "BERN", "BINOM", "HYPER"}
_RELS = {"<=", "<", ">=", ">", "=", "=="}


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str, lineno: int) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", lineno, pos + 1)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), lineno, pos + 1))
        pos = m.end()
    toks.append(_Tok("eol", "", lineno, len(text) + 1))
    return toks


class _Line:
    def __init__(self, toks: list[_Tok], pv: tuple[str, ...]):
        self.toks = toks
        self.i = 0
        self.pv = pv

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: _Tok | None = None) -> ParseError:
        tok = tok or self.cur
        return ParseError(msg, tok.line, tok.col)

    def accept(self, text: str) -> bool:
        if self.cur.text == text and self.cur.kind != "eol":
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> _Tok:
        if self.cur.text != text or self.cur.kind == "eol":
            found = self.cur.text or "end of line"
            raise self.error(f"expected {text!r}, found {found!r}")
        tok = self.cur
        self.i += 1
        return tok

    def ident(self, what: str) -> str:
        if self.cur.kind != "ident":
            raise self.error(f"expected {what}")
        tok = self.cur
        self.i += 1
        return tok.text

    # arithmetic ---------------------------------------------------------------
    def rational(self) -> Fraction:
        neg = self.accept("-")
        if self.cur.kind != "num":
            raise self.error("expected a number")
        val = Fraction(int(self.cur.text))
        self.i += 1
        if self.accept("/"):
            if self.cur.kind != "num":
                raise self.error("expected a denominator")
            den = int(self.cur.text)
            if den == 0:
                raise self.error("division by zero")
            self.i += 1
            val /= den
        return -val if neg else val

    def expr(self) -> Polynomial:
        out = self.term()
        while self.cur.text in ("+", "-") and self.cur.kind == "sym":
            op = self.cur.text
            self.i += 1
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self) -> Polynomial:
        out = self.factor()
        while self.cur.text in ("*", "/"):
            op_tok = self.cur
            self.i += 1
            rhs = self.factor()
            if op_tok.text == "*":
                out = out * rhs
            else:
                if not rhs.is_constant() or rhs.is_zero():
                    raise self.error("division only by nonzero constants", op_tok)
                out = out * (1 / rhs.constant_term)
        return out

    def factor(self) -> Polynomial:
        if self.accept("-"):
            return -self.factor()
        if self.accept("+"):
            return self.factor()
        base = self.atom()
        if self.cur.text in ("^", "**"):
            self.i += 1
            if self.cur.kind != "num":
                raise self.error("exponent must be a natural number")
            k = int(self.cur.text)
            self.i += 1
            base = base ** k
        return base

    def atom(self) -> Polynomial:
        tok = self.cur
        if tok.kind == "num":
            self.i += 1
            return Polynomial.const(int(tok.text))
        if tok.kind == "ident":
            if tok.text in _DISTS:
                raise self.error("distributions may only appear as a whole update right-hand side")
            self.i += 1
            return Polynomial.var(tok.text)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        raise self.error(f"unexpected {tok.text or 'end of line'!r} in expression")

    # program pieces -----------------------------------------------------------
    def dist(self, name: str, tok: _Tok) -> Distribution:
        self.expect("(")
        try:
            if name == "UNIF":
                a = self.expr()
                self.expect(",")
                d: Distribution = Uniform(a, self.expr())
            elif name == "GEO":
                d = Geometric(self.rational())
            elif name == "BERN":
                d = Bernoulli(self.rational())
            elif name == "BINOM":
                n = self.expr()
                self.expect(",")
                d = Binomial(n, self.rational())
            else:
                N = self.expr()
                self.expect(",")
                K = self.expr()
                self.expect(",")
                d = Hypergeometric(N, K, self.expr())
        except (ValueError, UnsupportedDistribution) as e:
            if isinstance(e, ParseError):
                raise
            raise self.error(str(e), tok) from None
        self.expect(")")
        for q in d.params():
            extra = q.vars() - set(self.pv)
            if extra:
                raise self.error(f"distribution parameters must use program variables only: {sorted(extra)}", tok)
        return d

    def update(self) -> tuple[str, UpdateRhs]:
        tok = self.cur
        x = self.ident("a program variable")
        if x not in self.pv:
            raise self.error(f"update of undeclared program variable {x!r}", tok)
        self.expect("=")
        if self.cur.kind == "ident" and self.cur.text in _DISTS and self.peek().text == "(":
            dtok = self.cur
            self.i += 1
            return x, self.dist(dtok.text, dtok)
        return x, self.expr()

    def branch(self) -> tuple[Fraction, str, list[tuple[str, UpdateRhs]], _Tok]:
        tok = self.cur
        prob = Fraction(1)
        if self.cur.kind == "num" or self.cur.text == "-":
            prob = self.rational()
            self.expect(":")
        loc = self.ident("a target location")
        updates: list[tuple[str, UpdateRhs]] = []
        if self.accept("("):
            if not self.accept(")"):
                while True:
                    utok = self.cur
                    x, rhs = self.update()
                    if any(x == y for y, _ in updates):
                        raise self.error(f"variable {x!r} updated twice", utok)
                    if not (isinstance(rhs, Polynomial) and rhs == Polynomial.var(x)):
                        updates.append((x, rhs))
                    if self.accept(")"):
                        break
                    self.expect(",")
        return prob, loc, updates, tok

    def guard(self) -> Constraint:
        comps: list[Comparison] = []
        if self.accept("true"):
            return Constraint()
        while True:
            lhs = self.expr()
            rel = self.cur
            if rel.text not in _RELS:
                raise self.error("expected a comparison operator")
            self.i += 1
            rhs = self.expr()
            comps.append(Comparison(lhs, "=" if rel.text == "==" else rel.text, rhs))
            if not self.accept("&&"):
                break
        return normalize_constraint(comps)


def parse_program(text: str) -> PIP:
    pv: tuple[str, ...] | None = None
    start: str | None = None
    locations: list[str] = []
    gts: list[GeneralTransition] = []
    labels: set[str] = set()
    t_count = 0

    def note_loc(name: str) -> None:
        if name not in locations:
            locations.append(name)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        toks = _tokenize(raw, lineno)
        if toks[0].kind == "eol":
            continue
        ln = _Line(toks, pv or ())
        head = toks[0]
        if head.text == "vars" and toks[1].text != "->" and toks[1].text != ":":
            if pv is not None:
                raise ParseError("duplicate vars declaration", head.line, head.col)
            ln.i = 1
            names: list[str] = []
            while ln.cur.kind != "eol":
                tok = ln.cur
                name = ln.ident("a variable name")
                if name in names:
                    raise ParseError(f"variable {name!r} declared twice", tok.line, tok.col)
                names.append(name)
            pv = tuple(names)
            continue
        if head.text == "start" and toks[1].text != "->" and toks[1].text != ":":
            if start is not None:
                raise ParseError("duplicate start declaration", head.line, head.col)
            ln.i = 1
            start = ln.ident("the initial location")
            if ln.cur.kind != "eol":
                raise ln.error("unexpected text after start location")
            continue
        if pv is None:
            raise ParseError("rules must follow the vars declaration", head.line, head.col)
        gid = f"g{len(gts)}"
        if head.kind == "ident" and ln.peek().text == ":" and ln.peek(2).kind == "ident" and ln.peek(3).text == "->":
            gid = head.text
            if gid in labels:
                raise ParseError(f"duplicate label {gid!r}", head.line, head.col)
            ln.i = 2
        labels.add(gid)
        src = ln.ident("a source location")
        note_loc(src)
        ln.expect("->")
        branches = [ln.branch()]
        while ln.accept("(+)"):
            branches.append(ln.branch())
        guard = Constraint()
        if ln.accept(":|:"):
            guard = ln.guard()
        cost = Fraction(1)
        if ln.accept("{"):
            ctok = ln.cur
            cost = ln.rational()
            if cost < 0:
                raise ln.error("cost must be nonnegative", ctok)
            ln.expect("}")
        if ln.cur.kind != "eol":
            raise ln.error(f"unexpected {ln.cur.text!r}")
        members = []
        for prob, loc, updates, btok in branches:
            if prob < 0 or prob > 1:
                raise ParseError(f"probability {prob} outside [0, 1]", btok.line, btok.col)
            note_loc(loc)
            members.append(Transition(f"t{t_count}", src, prob, guard, tuple(updates), loc, cost))
            t_count += 1
        gts.append(GeneralTransition(gid, tuple(members)))

    if pv is None:
        raise ParseError("missing vars declaration", 1, 1)
    if start is None:
        raise ParseError("missing start declaration", 1, 1)
    if start in locations:
        locations.remove(start)
    locations.insert(0, start)
    return PIP(pv, tuple(locations), tuple(gts), start)


def parse_poly(text: str) -> Polynomial:
    """A single polynomial expression such as ``2*x^2 - y + 1/2``."""
    line = _Line(_tokenize(text, 1), ())
    p = line.expr()
    if line.cur.kind != "eol":
        raise line.error(f"unexpected {line.cur.text!r}")
    return p


def load_program(path: str | Path) -> PIP:
    return parse_program(Path(path).read_text(encoding="utf-8"))


def _fmt_frac(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _fmt_update(x: str, rhs: UpdateRhs) -> str:
    return f"{x} = {rhs}"


def format_program(p: PIP) -> str:
    """Print ``p`` in the input format; ``parse_program`` reads it back unchanged."""
    lines = [f"vars {' '.join(p.pv)}".rstrip(), f"start {p.initial}"]
    for g in p.general_transitions:
        branches = []
        for t in g.members:
            ups = ", ".join(_fmt_update(x, r) for x, r in t.update)
            branches.append(f"{_fmt_frac(t.prob)}: {t.target}({ups})")
        atoms = [f"{a} >= 0" for a in g.guard.atoms + g.guard.nonlinear]
        guard = f" :|: {' && '.join(atoms)}" if atoms else ""
        lines.append(f"{g.id}: {g.source} -> {' (+) '.join(branches)}{guard} {{{_fmt_frac(g.cost)}}}")
    return "\n".join(lines) + "\n"


__all__ = ["ParseError", "parse_program", "parse_poly", "load_program", "format_program", "is_dist"]
