"""Polynomial symbol parser.

Grammar (whitespace ignored)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/')? unary)*    # juxtaposition multiplies;
                                            # '/' needs a constant divisor
    unary  := ('+' | '-') unary | power
    power  := atom (('^' | '**') INT)?
    atom   := NUMBER ['i' | 'j'] | 'i' | 'j' | VAR | '(' expr ')'

``VAR`` is ``z`` (only when n = 1) or ``z1, ..., zn``.  Coefficients are kept
as exact complex rationals until the final conversion to a series.
"""
from __future__ import annotations

import re
from fractions import Fraction

from .series import TruncSeries

# exact polynomial: {exponent tuple: (re, im)} with Fraction parts
Poly = dict


class SymbolError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        self.pos = pos
        pointer = " " * pos + "^"
        super().__init__(f"{message} at position {pos}\n  {text}\n  {pointer}")


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<var>z\d*)|(?P<imag>[ij])|(?P<op>\*\*|[-+*/^()]))"
)


def _cmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _poly_add(p: Poly, q: Poly, sign: int = 1) -> Poly:
    out = dict(p)
    for k, (re_, im_) in q.items():
        a = out.get(k, (Fraction(0), Fraction(0)))
        out[k] = (a[0] + sign * re_, a[1] + sign * im_)
    return {k: v for k, v in out.items() if v[0] or v[1]}


def _poly_mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for ka, va in p.items():
        for kb, vb in q.items():
            k = tuple(x + y for x, y in zip(ka, kb))
            c = _cmul(va, vb)
            a = out.get(k, (Fraction(0), Fraction(0)))
            out[k] = (a[0] + c[0], a[1] + c[1])
    return {k: v for k, v in out.items() if v[0] or v[1]}


class _Parser:
    def __init__(self, text: str, n: int):
        self.text, self.n = text, n
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
                raise SymbolError(f"unexpected character {text[bad]!r}", text, bad)
            kind = m.lastgroup
            start = m.start(kind)
            self.tokens.append((kind, m.group(kind), start))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def error(self, message: str):
        tok = self.peek()
        pos = tok[2] if tok else len(self.text)
        raise SymbolError(message, self.text, pos)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def const(self, re_=0, im_=0) -> Poly:
        c = (Fraction(re_), Fraction(im_))
        return {(0,) * self.n: c} if c[0] or c[1] else {}

    def parse(self) -> Poly:
        if not self.tokens:
            raise SymbolError("empty expression", self.text, 0)
        p = self.expr()
        if self.peek() is not None:
            self.error("unexpected token")
        return p

    def expr(self) -> Poly:
        p = self.term()
        while (tok := self.peek()) and tok[0] == "op" and tok[1] in "+-":
            self.take()
            q = self.term()
            p = _poly_add(p, q, 1 if tok[1] == "+" else -1)
        return p

    def _starts_atom(self, tok) -> bool:
        return tok is not None and (tok[0] in ("num", "var", "imag") or tok[1] == "(")

    def term(self) -> Poly:
        p = self.unary()
        while True:
            tok = self.peek()
            if tok and tok[0] == "op" and tok[1] == "*":
                self.take()
                p = _poly_mul(p, self.unary())
            elif tok and tok[0] == "op" and tok[1] == "/":
                self.take()
                pos = tok[2] + 1
                q = self.unary()
                if any(any(k) for k in q):
                    raise SymbolError("divisor must be a constant", self.text, pos)
                if not q:
                    raise SymbolError("division by zero", self.text, pos)
                (c,) = q.values()
                m = c[0] ** 2 + c[1] ** 2
                p = _poly_mul(p, {(0,) * self.n: (c[0] / m, -c[1] / m)})
            elif self._starts_atom(tok):
                p = _poly_mul(p, self.power())
            else:
                return p

    def unary(self) -> Poly:
        tok = self.peek()
        if tok and tok[0] == "op" and tok[1] in "+-":
            self.take()
            p = self.unary()
            return p if tok[1] == "+" else _poly_add({}, p, -1)
        return self.power()

    def power(self) -> Poly:
        p = self.atom()
        tok = self.peek()
        if tok and tok[0] == "op" and tok[1] in ("^", "**"):
            self.take()
            e = self.peek()
            if e is None or e[0] != "num" or not e[1].isdigit():
                self.error("exponent must be a non-negative integer")
            self.take()
            out = self.const(1)
            for _ in range(int(e[1])):
                out = _poly_mul(out, p)
            return out
        return p

    def atom(self) -> Poly:
        tok = self.peek()
        if tok is None:
            self.error("unexpected end of expression")
        kind, val, pos = tok
        if kind == "num":
            self.take()
            x = Fraction(val)
            nxt = self.peek()
            if nxt and nxt[0] == "imag" and nxt[2] == pos + len(val):
                self.take()
                return self.const(0, x)
            return self.const(x)
        if kind == "imag":
            self.take()
            return self.const(0, 1)
        if kind == "var":
            self.take()
            if val == "z":
                if self.n != 1:
                    raise SymbolError(f"use z1..z{self.n} when n = {self.n}", self.text, pos)
                idx = 0
            else:
                idx = int(val[1:]) - 1
                if not 0 <= idx < self.n:
                    raise SymbolError(f"variable {val} outside z1..z{self.n}", self.text, pos)
            e = [0] * self.n
            e[idx] = 1
            return {tuple(e): (Fraction(1), Fraction(0))}
        if val == "(":
            self.take()
            p = self.expr()
            close = self.peek()
            if not close or close[1] != ")":
                self.error("missing ')'")
            self.take()
            return p
        self.error(f"unexpected {val!r}")


def infer_dimension(text: str) -> int:
    names = re.findall(r"z(\d*)", text)
    indices = [int(s) for s in names if s]
    return max(indices) if indices else 1


def parse_exact(text: str, n: int | None = None) -> Poly:
    """Exact coefficients ``{alpha: (re, im)}`` with Fraction parts."""
    if n is None:
        n = infer_dimension(text)
    return _Parser(text, n).parse()


def parse_symbol(text: str, n: int | None = None, D: int | None = None) -> TruncSeries:
    """Parse a polynomial in ``z`` or ``z1..zn`` into a :class:`TruncSeries`.

    ``D`` defaults to the polynomial degree; a smaller ``D`` is an error since
    it would silently drop terms.
    """
    if n is None:
        n = infer_dimension(text)
    poly = parse_exact(text, n)
    deg = max((sum(k) for k in poly), default=0)
    if D is None:
        D = deg
    elif D < deg:
        raise SymbolError(f"degree {deg} exceeds truncation D={D}", text, 0)
    return TruncSeries(n, D, {k: complex(float(v[0]), float(v[1])) for k, v in poly.items()})
