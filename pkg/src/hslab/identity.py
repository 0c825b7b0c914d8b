"""Exact univariate polynomial calculus over the rationals.

Used to check the alternating-binomial differentiation identity

    sum_{k=0}^{N} (-1)^k C(N,k) g^k D^{N-1}(g^{N-k} f) = 0

and the closed form it gives for ``D^N(f/g)``, with no floating point
anywhere.  Polynomials keep a scaled-integer representation internally
(integer numerators over one common denominator) so products run on plain
Python ints.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Sequence

SEED = 20180319  # published seed for the random identity trials


class RationalPoly:
    """Exact polynomial ``sum_i c_i x^i`` with rational ``c_i``.

    Trailing zeros are stripped, so the zero polynomial has no coefficients.
    """

    __slots__ = ("_num", "_den")

    def __init__(self, coeffs: Iterable[Fraction | int | str] = ()):
        fr = [Fraction(c) for c in coeffs]
        den = 1
        for c in fr:
            den = den * c.denominator // gcd(den, c.denominator)
        num = [c.numerator * (den // c.denominator) for c in fr]
        self._set(num, den)

    def _set(self, num: list[int], den: int) -> None:
        while num and num[-1] == 0:
            num.pop()
        if not num:
            self._num, self._den = (), 1
            return
        if den < 0:
            num, den = [-a for a in num], -den
        g = den
        for a in num:
            g = gcd(g, a)
            if g == 1:
                break
        if g > 1:
            num = [a // g for a in num]
            den //= g
        self._num, self._den = tuple(num), den

    @classmethod
    def _raw(cls, num: list[int], den: int) -> "RationalPoly":
        obj = cls.__new__(cls)
        obj._set(num, den)
        return obj

    @classmethod
    def monomial(cls, k: int, c: Fraction | int = 1) -> "RationalPoly":
        c = Fraction(c)
        return cls._raw([0] * k + [c.numerator], c.denominator)

    @property
    def coeffs(self) -> list[Fraction]:
        return [Fraction(a, self._den) for a in self._num]

    @property
    def degree(self) -> int:
        return len(self._num) - 1

    def is_zero(self) -> bool:
        return not self._num

    def __bool__(self) -> bool:
        return bool(self._num)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RationalPoly):
            return NotImplemented
        return self._num == other._num and self._den == other._den

    def __hash__(self) -> int:
        return hash((self._num, self._den))

    def __repr__(self) -> str:
        return f"RationalPoly({[str(c) for c in self.coeffs]})"

    def __str__(self) -> str:
        if not self._num:
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c:
                parts.append(f"{c}" if i == 0 else f"{c}*x^{i}")
        return " + ".join(parts)

    def __neg__(self) -> "RationalPoly":
        return RationalPoly._raw([-a for a in self._num], self._den)

    def __add__(self, other: "RationalPoly") -> "RationalPoly":
        if not isinstance(other, RationalPoly):
            other = RationalPoly([other])
        da, db = self._den, other._den
        den = da * db // gcd(da, db)
        sa, sb = den // da, den // db
        a, b = self._num, other._num
        m = max(len(a), len(b))
        num = [
            (a[i] * sa if i < len(a) else 0) + (b[i] * sb if i < len(b) else 0) for i in range(m)
        ]
        return RationalPoly._raw(num, den)

    def __sub__(self, other: "RationalPoly") -> "RationalPoly":
        return self + (-other)

    def __mul__(self, other: "RationalPoly | Fraction | int") -> "RationalPoly":
        if not isinstance(other, RationalPoly):
            c = Fraction(other)
            return RationalPoly._raw([a * c.numerator for a in self._num], self._den * c.denominator)
        a, b = self._num, other._num
        if not a or not b:
            return RationalPoly()
        num = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    num[i + j] += x * y
        return RationalPoly._raw(num, self._den * other._den)

    __rmul__ = __mul__

    def __pow__(self, m: int) -> "RationalPoly":
        if m < 0:
            raise ValueError("negative power")
        out = RationalPoly([1])
        base = self
        while m:
            if m & 1:
                out = out * base
            base = base * base
            m >>= 1
        return out

    def __call__(self, x: Fraction | int) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def divmod(self, other: "RationalPoly") -> tuple["RationalPoly", "RationalPoly"]:
        """Polynomial long division."""
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        rem = self.coeffs
        div = other.coeffs
        q = [Fraction(0)] * max(len(rem) - len(div) + 1, 0)
        lead = div[-1]
        for i in range(len(q) - 1, -1, -1):
            c = rem[i + len(div) - 1] / lead
            q[i] = c
            if c:
                for j, d in enumerate(div):
                    rem[i + j] -= c * d
        return RationalPoly(q), RationalPoly(rem)


def X() -> RationalPoly:
    return RationalPoly([0, 1])


def derive(p: RationalPoly, m: int = 1) -> RationalPoly:
    """Exact ``m``-th derivative."""
    if m < 0:
        raise ValueError("derivative order must be >= 0")
    num, den = list(p._num), p._den
    for _ in range(m):
        num = [i * a for i, a in enumerate(num)][1:]
    return RationalPoly._raw(num, den)


@lru_cache(maxsize=None)
def pascal_row(N: int) -> tuple[int, ...]:
    """Binomial coefficients C(N, 0..N) by Pascal's recurrence."""
    if N < 0:
        raise ValueError("N must be >= 0")
    row = (1,)
    for _ in range(N):
        row = tuple(a + b for a, b in zip((0,) + row, row + (0,)))
    return row


def _powers(g: RationalPoly, N: int) -> list[RationalPoly]:
    out = [RationalPoly([1])]
    for _ in range(N):
        out.append(out[-1] * g)
    return out


def theorem5_residual(f: RationalPoly, g: RationalPoly, N: int) -> RationalPoly:
    """Evaluate ``sum_k (-1)^k C(N,k) g^k D^{N-1}(g^{N-k} f)`` exactly.

    Nothing about the outcome is assumed; a zero result is a verification of
    the identity for this ``(f, g, N)``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    gp = _powers(g, N)
    binom = pascal_row(N)
    total = RationalPoly()
    for k in range(N + 1):
        term = gp[k] * derive(gp[N - k] * f, N - 1) * binom[k]
        total = total - term if k % 2 else total + term
    return total


@dataclass(frozen=True)
class PolyFraction:
    """``numerator / base**power``; never reduced unless asked."""

    numerator: RationalPoly
    base: RationalPoly
    power: int

    def __post_init__(self) -> None:
        if self.power < 0:
            raise ValueError("power must be >= 0")
        if self.base.is_zero():
            raise ZeroDivisionError("base polynomial is zero")

    def equivalent(self, other: "PolyFraction") -> bool:
        """Exact equality by cross-multiplication to a common power of the bases."""
        if self.base == other.base:
            m = max(self.power, other.power)
            return (
                self.numerator * self.base ** (m - self.power)
                == other.numerator * other.base ** (m - other.power)
            )
        return self.numerator * other.base**other.power == other.numerator * self.base**self.power

    def normalized(self) -> "PolyFraction":
        """Cancel factors of ``base`` from the numerator while they divide it."""
        num, m = self.numerator, self.power
        while m > 0 and not num.is_zero():
            q, r = num.divmod(self.base)
            if not r.is_zero():
                break
            num, m = q, m - 1
        if num.is_zero():
            m = 0
        return PolyFraction(num, self.base, m)

    def __str__(self) -> str:
        return f"({self.numerator}) / ({self.base})^{self.power}"


def quotient_derivative(f: RationalPoly, g: RationalPoly, N: int) -> PolyFraction:
    """Closed form for ``D^N(f/g)`` with denominator ``g^{N+1}``.

    numerator = (-1)^N sum_{k=0}^{N} (-1)^k C(N+1,k) g^k D^N(g^{N-k} f)
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if g.is_zero():
        raise ZeroDivisionError("g is the zero polynomial")
    gp = _powers(g, N)
    binom = pascal_row(N + 1)
    total = RationalPoly()
    for k in range(N + 1):
        term = gp[k] * derive(gp[N - k] * f, N) * binom[k]
        total = total - term if k % 2 else total + term
    if N % 2:
        total = -total
    return PolyFraction(total, g, N + 1)


def quotient_derivative_oracle(f: RationalPoly, g: RationalPoly, N: int) -> PolyFraction:
    """``D^N(f/g)`` by repeating ``D(p/g^m) = (p' g - m p g') / g^{m+1}``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if g.is_zero():
        raise ZeroDivisionError("g is the zero polynomial")
    dg = derive(g)
    p, m = f, 1
    for _ in range(N):
        p = derive(p) * g - p * dg * m
        m += 1
    return PolyFraction(p, g, m)


def random_rational_poly(rng: random.Random, max_degree: int = 6) -> RationalPoly:
    """Integer coefficients in [-9, 9] over denominators in {1, 2, 3}."""
    deg = rng.randint(0, max_degree)
    return RationalPoly(
        Fraction(rng.randint(-9, 9), rng.choice((1, 2, 3))) for _ in range(deg + 1)
    )


def random_pairs(
    trials: int, seed: int = SEED, max_degree: int = 6, nonzero_g: bool = False
) -> list[tuple[RationalPoly, RationalPoly]]:
    rng = random.Random(seed)
    pairs = []
    while len(pairs) < trials:
        f = random_rational_poly(rng, max_degree)
        g = random_rational_poly(rng, max_degree)
        if nonzero_g and g.is_zero():
            continue
        pairs.append((f, g))
    return pairs


def _poly_json(p: RationalPoly) -> list[str]:
    return [str(c) for c in p.coeffs]


def verify_identity(nmax: int = 6, trials: int = 200, seed: int = SEED, max_degree: int = 6) -> dict:
    """Run the identity over ``N = 1..nmax`` and ``trials`` seeded pairs."""
    pairs = random_pairs(trials, seed, max_degree)
    first_failure = None
    for N in range(1, nmax + 1):
        for t, (f, g) in enumerate(pairs):
            res = theorem5_residual(f, g, N)
            if not res.is_zero():
                first_failure = {
                    "N": N,
                    "trial": t,
                    "f": _poly_json(f),
                    "g": _poly_json(g),
                    "residual": _poly_json(res),
                }
                break
        if first_failure:
            break
    return {"N": nmax, "trials": trials, "all_zero": first_failure is None, "first_failure": first_failure}


def check_quotient(nmax: int = 5, trials: int = 100, seed: int = SEED, max_degree: int = 6) -> dict:
    """Compare the closed form against the iterated quotient rule."""
    pairs = random_pairs(trials, seed, max_degree, nonzero_g=True)
    first_failure = None
    for N in range(1, nmax + 1):
        for t, (f, g) in enumerate(pairs):
            a = quotient_derivative(f, g, N)
            b = quotient_derivative_oracle(f, g, N)
            if not a.equivalent(b):
                first_failure = {
                    "N": N,
                    "trial": t,
                    "f": _poly_json(f),
                    "g": _poly_json(g),
                    "closed_form": _poly_json(a.numerator),
                    "oracle": _poly_json(b.numerator),
                }
                break
        if first_failure:
            break
    return {"N": nmax, "trials": trials, "all_equal": first_failure is None, "first_failure": first_failure}


def poly_from_coeffs(coeffs: Sequence[str | int]) -> RationalPoly:
    return RationalPoly(Fraction(c) for c in coeffs)
