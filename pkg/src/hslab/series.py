"""Truncated power series on the unit ball of C^n.

A :class:`TruncSeries` is a holomorphic polynomial in ``n`` variables whose
terms all have total degree at most ``D``.  Coefficients are stored sparsely,
keyed by multi-index tuples, and always iterated in graded order
(degree-major, descending lexicographic within a degree) so that anything
assembled from them is deterministic.
"""
from __future__ import annotations

import json
import math
from functools import lru_cache
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

MultiIndex = tuple[int, ...]


def multi_index(exponents: Iterable[int], n: int | None = None) -> MultiIndex:
    """Validate and return ``exponents`` as a multi-index tuple."""
    alpha = tuple(int(e) for e in exponents)
    if not alpha:
        raise ValueError("multi-index must have length >= 1")
    if n is not None and len(alpha) != n:
        raise ValueError(f"multi-index {alpha} has length {len(alpha)}, expected {n}")
    if any(e < 0 for e in alpha):
        raise ValueError(f"multi-index {alpha} has a negative entry")
    return alpha


def _compositions(k: int, n: int) -> Iterator[MultiIndex]:
    # descending lex: (k,0,..), (k-1,1,..), ...
    if n == 1:
        yield (k,)
        return
    for first in range(k, -1, -1):
        for rest in _compositions(k - first, n - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def indices_of_degree(n: int, k: int) -> tuple[MultiIndex, ...]:
    """All multi-indices of length ``n`` and total degree ``k``."""
    return tuple(_compositions(k, n))


@lru_cache(maxsize=None)
def graded_indices(n: int, D: int) -> tuple[MultiIndex, ...]:
    """All multi-indices with ``|alpha| <= D`` in graded order."""
    if n < 1 or D < 0:
        raise ValueError("need n >= 1 and D >= 0")
    out: list[MultiIndex] = []
    for k in range(D + 1):
        out.extend(indices_of_degree(n, k))
    return tuple(out)


def _graded_key(alpha: MultiIndex) -> tuple:
    return (sum(alpha), tuple(-a for a in alpha))


def _init(obj: "TruncSeries", n: int, D: int, coeffs: dict[MultiIndex, complex]) -> None:
    ordered = {a: coeffs[a] for a in sorted(coeffs, key=_graded_key) if coeffs[a] != 0}
    object.__setattr__(obj, "_n", n)
    object.__setattr__(obj, "_D", D)
    object.__setattr__(obj, "_coeffs", ordered)


class TruncSeries:
    """Polynomial truncated at total degree ``D`` in ``n`` complex variables.

    Instances are immutable.  Zero coefficients are never stored, so an
    absent multi-index means a zero coefficient.
    """

    __slots__ = ("_n", "_D", "_coeffs")

    def __init__(self, n: int, D: int, coeffs: Mapping[Sequence[int], complex] | None = None):
        if n < 1:
            raise ValueError("dimension n must be >= 1")
        if D < 0:
            raise ValueError("truncation degree D must be >= 0")
        clean: dict[MultiIndex, complex] = {}
        for key, value in (coeffs or {}).items():
            alpha = multi_index(key, n)
            if sum(alpha) > D:
                raise ValueError(f"index {alpha} exceeds truncation degree {D}")
            c = complex(value)
            if c != 0:
                clean[alpha] = clean.get(alpha, 0) + c
        _init(self, n, D, clean)

    # -- constructors -------------------------------------------------

    @classmethod
    def constant(cls, c: complex, n: int = 1, D: int = 0) -> "TruncSeries":
        return cls(n, D, {(0,) * n: c})

    @classmethod
    def coordinate(cls, i: int, n: int = 1, D: int = 1) -> "TruncSeries":
        """The coordinate function ``z_{i+1}`` (zero-based ``i``)."""
        alpha = [0] * n
        alpha[i] = 1
        return cls(n, max(D, 1), {tuple(alpha): 1.0})

    @classmethod
    def _trusted(cls, n: int, D: int, coeffs: dict[MultiIndex, complex]) -> "TruncSeries":
        obj = cls.__new__(cls)
        _init(obj, n, D, coeffs)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("TruncSeries is immutable")

    # -- accessors ----------------------------------------------------

    @property
    def n(self) -> int:
        return self._n

    @property
    def D(self) -> int:
        return self._D

    @property
    def coeffs(self) -> Mapping[MultiIndex, complex]:
        return MappingProxyType(self._coeffs)

    def __getitem__(self, alpha: Sequence[int]) -> complex:
        return self._coeffs.get(tuple(alpha), 0j)

    def items(self) -> Iterator[tuple[MultiIndex, complex]]:
        return iter(self._coeffs.items())

    def __len__(self) -> int:
        return len(self._coeffs)

    @property
    def degree(self) -> int:
        """Largest total degree carrying a nonzero coefficient (-1 for zero)."""
        return max((sum(a) for a in self._coeffs), default=-1)

    def is_zero(self) -> bool:
        return not self._coeffs

    def with_degree(self, D: int) -> "TruncSeries":
        """Same coefficients, truncated (or padded) to degree ``D``."""
        return TruncSeries._trusted(
            self._n, D, {a: c for a, c in self._coeffs.items() if sum(a) <= D}
        )

    def coefficient_vector(self, D: int | None = None) -> np.ndarray:
        """Coefficients laid out along :func:`graded_indices`."""
        D = self._D if D is None else D
        basis = graded_indices(self._n, D)
        return np.array([self._coeffs.get(a, 0j) for a in basis], dtype=complex)

    # -- arithmetic ---------------------------------------------------

    def _check(self, other: "TruncSeries") -> None:
        if self._n != other._n:
            raise ValueError(f"dimension mismatch: {self._n} vs {other._n}")

    def __add__(self, other: "TruncSeries | complex") -> "TruncSeries":
        if not isinstance(other, TruncSeries):
            other = TruncSeries.constant(other, self._n, self._D)
        self._check(other)
        D = min(self._D, other._D)
        out = {a: c for a, c in self._coeffs.items() if sum(a) <= D}
        for a, c in other._coeffs.items():
            if sum(a) <= D:
                out[a] = out.get(a, 0j) + c
        return TruncSeries._trusted(self._n, D, out)

    __radd__ = __add__

    def __neg__(self) -> "TruncSeries":
        return TruncSeries._trusted(self._n, self._D, {a: -c for a, c in self._coeffs.items()})

    def __sub__(self, other: "TruncSeries | complex") -> "TruncSeries":
        return self + (-other)

    def __rsub__(self, other: complex) -> "TruncSeries":
        return (-self) + other

    def scale(self, s: complex) -> "TruncSeries":
        return TruncSeries._trusted(self._n, self._D, {a: s * c for a, c in self._coeffs.items()})

    def __mul__(self, other: "TruncSeries | complex") -> "TruncSeries":
        if isinstance(other, TruncSeries):
            return multiply(self, other, min(self._D, other._D))
        return self.scale(other)

    def __rmul__(self, other: complex) -> "TruncSeries":
        return self.scale(other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TruncSeries):
            return NotImplemented
        return self._n == other._n and self._D == other._D and self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash((self._n, self._D, tuple(self._coeffs.items())))

    def max_coeff_diff(self, other: "TruncSeries") -> float:
        """Largest coefficient-wise absolute difference."""
        self._check(other)
        keys = set(self._coeffs) | set(other._coeffs)
        return max((abs(self[a] - other[a]) for a in keys), default=0.0)

    def __call__(self, *z: complex) -> complex:
        return evaluate(self, z[0] if len(z) == 1 else z)

    def __repr__(self) -> str:
        if not self._coeffs:
            return f"TruncSeries(n={self._n}, D={self._D}, 0)"
        terms = " + ".join(f"({c:g})*z^{list(a)}" for a, c in self._coeffs.items())
        return f"TruncSeries(n={self._n}, D={self._D}, {terms})"

    # -- interchange --------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "n": self._n,
            "D": self._D,
            "terms": [
                {"alpha": list(a), "re": c.real, "im": c.imag} for a, c in self._coeffs.items()
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "TruncSeries":
        try:
            n, D = int(data["n"]), int(data["D"])
            coeffs: dict[MultiIndex, complex] = {}
            for term in data["terms"]:
                alpha = multi_index(term["alpha"], n)
                coeffs[alpha] = coeffs.get(alpha, 0j) + complex(
                    float(term.get("re", 0.0)), float(term.get("im", 0.0))
                )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed series literal: {exc}") from exc
        return cls(n, D, coeffs)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TruncSeries":
        return cls.from_dict(json.loads(text))


def radial_derivative(f: TruncSeries, beta: float) -> TruncSeries:
    """Fractional radial derivative: scale the degree-k part by ``k**beta``.

    The constant term is always dropped, for every ``beta``.
    """
    out = {}
    for alpha, c in f.items():
        k = sum(alpha)
        if k >= 1:
            out[alpha] = c * (float(k) ** beta)
    return TruncSeries._trusted(f.n, f.D, out)


def multiply(f: TruncSeries, g: TruncSeries, D: int) -> TruncSeries:
    """Product of ``f`` and ``g`` with every term of degree > ``D`` dropped."""
    if f.n != g.n:
        raise ValueError(f"dimension mismatch: {f.n} vs {g.n}")
    out: dict[MultiIndex, complex] = {}
    g_items = [(b, sum(b), d) for b, d in g.items()]
    for a, c in f.items():
        ka = sum(a)
        if ka > D:
            continue
        for b, kb, d in g_items:
            if ka + kb > D:
                continue
            key = tuple(x + y for x, y in zip(a, b))
            out[key] = out.get(key, 0j) + c * d
    return TruncSeries._trusted(f.n, D, out)


def evaluate(f: TruncSeries, z: Sequence[complex] | complex) -> complex:
    """Evaluate the polynomial at a point of C^n."""
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    if zz.shape != (f.n,):
        raise ValueError(f"point has shape {zz.shape}, expected ({f.n},)")
    total = 0j
    for alpha, c in f.items():
        term = c
        for zi, e in zip(zz, alpha):
            if e:
                term *= complex(zi) ** e
        total += term
    return total


def evaluate_many(f: TruncSeries, points: np.ndarray) -> np.ndarray:
    """Vectorised evaluation at an ``(m, n)`` array (or ``(m,)`` when n = 1)."""
    pts = np.asarray(points, dtype=complex)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[1] != f.n:
        raise ValueError(f"points have {pts.shape[1]} coordinates, expected {f.n}")
    out = np.zeros(pts.shape[0], dtype=complex)
    maxdeg = max(f.degree, 0)
    # power tables: powers[i][e] = z_i**e
    powers = [[np.ones(pts.shape[0], dtype=complex)] for _ in range(f.n)]
    for i in range(f.n):
        for _ in range(maxdeg):
            powers[i].append(powers[i][-1] * pts[:, i])
    for alpha, c in f.items():
        term = np.full(pts.shape[0], c, dtype=complex)
        for i, e in enumerate(alpha):
            if e:
                term = term * powers[i][e]
        out += term
    return out


def homogeneous_part(f: TruncSeries, k: int) -> TruncSeries:
    """Restriction of ``f`` to the terms of total degree exactly ``k``."""
    if not 0 <= k <= f.D:
        raise ValueError(f"degree {k} outside [0, {f.D}]")
    return TruncSeries._trusted(f.n, f.D, {a: c for a, c in f.items() if sum(a) == k})


def random_series(rng: np.random.Generator, n: int, D: int, decay: float = 1.0) -> TruncSeries:
    """Series with complex Gaussian coefficients on every index of degree <= D.

    ``decay`` multiplies the degree-k coefficients by ``decay**k``.
    """
    basis = graded_indices(n, D)
    vals = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
    return TruncSeries(n, D, {a: v * decay ** sum(a) for a, v in zip(basis, vals)})


def monomial_count(n: int, D: int) -> int:
    """Number of multi-indices of length ``n`` with degree <= ``D``."""
    return math.comb(D + n, n)
