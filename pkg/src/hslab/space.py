"""Hardy-Sobolev inner products on the unit ball.

For ``f = sum c_alpha z^alpha`` the Hardy-Sobolev norm is

    ||f||_beta^2 = |f(0)|^2 + ||R^beta f||_{H^2}^2 = sum |c_alpha|^2 w_alpha

with ``w_0 = 1`` and ``w_alpha = |alpha|^{2 beta} h2(alpha)`` for ``|alpha| >= 1``,
where ``h2(alpha) = (n-1)! alpha! / (n-1+|alpha|)!`` is the squared H^2 norm of
the monomial.  Everything here is coefficient-side; no integrals over the
ball are ever evaluated.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .series import MultiIndex, TruncSeries, graded_indices, radial_derivative, random_series


def _log_h2(alpha: Sequence[int]) -> float:
    n, k = len(alpha), sum(alpha)
    return math.lgamma(n) + sum(math.lgamma(a + 1) for a in alpha) - math.lgamma(n + k)


def h2_monomial_norm(alpha: Sequence[int]) -> float:
    """Squared H^2 norm of ``z^alpha``: ``(n-1)! alpha! / (n-1+|alpha|)!``."""
    if len(alpha) == 1:
        return 1.0
    return math.exp(_log_h2(alpha))


def bergman_monomial_norm(alpha: Sequence[int], t: float) -> float:
    """Squared norm of ``z^alpha`` in the weighted Bergman space A^2_t.

    ``alpha! Gamma(n+t+1) / Gamma(n+t+1+|alpha|)``, normalised so that the
    constant 1 has norm 1.
    """
    if t <= -1:
        raise ValueError(f"Bergman weight t={t} must exceed -1")
    n, k = len(alpha), sum(alpha)
    log = sum(math.lgamma(a + 1) for a in alpha) + math.lgamma(n + t + 1) - math.lgamma(n + t + 1 + k)
    return math.exp(log)


@dataclass(frozen=True)
class SpaceModel:
    """The space H^2_beta on the ball of C^n, described by its monomial weights."""

    n: int
    beta: float
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)
    _lock: threading.Lock = field(
        default_factory=threading.Lock, init=False, repr=False, compare=False, hash=False
    )

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("dimension n must be >= 1")
        if not math.isfinite(self.beta):
            raise ValueError("beta must be finite")

    def weight(self, alpha: Sequence[int]) -> float:
        """``||z^alpha||_beta^2``."""
        alpha = tuple(alpha)
        w = self._cache.get(alpha)
        if w is None:
            if len(alpha) != self.n:
                raise ValueError(f"multi-index {alpha} does not match n={self.n}")
            k = sum(alpha)
            if k == 0:
                w = 1.0
            elif self.n == 1:
                w = float(k) ** (2 * self.beta)
            else:
                w = math.exp(2 * self.beta * math.log(k) + _log_h2(alpha))
            with self._lock:
                self._cache[alpha] = w
        return w

    def weights(self, D: int) -> np.ndarray:
        """Weights along :func:`graded_indices` up to degree ``D``."""
        return np.array([self.weight(a) for a in graded_indices(self.n, D)])

    def degree_weight(self, k: int) -> float:
        """Weight of ``z_1^k`` (for n = 1 this is the weight of degree k)."""
        return self.weight((k,) + (0,) * (self.n - 1))


def _check_dim(f: TruncSeries, model: SpaceModel) -> None:
    if f.n != model.n:
        raise ValueError(f"series dimension {f.n} does not match model n={model.n}")


def inner(f: TruncSeries, g: TruncSeries, model: SpaceModel) -> complex:
    """``<f, g>_beta`` (linear in ``f``, conjugate-linear in ``g``)."""
    _check_dim(f, model)
    _check_dim(g, model)
    total = 0j
    for alpha, c in f.items():
        d = g[alpha]
        if d:
            total += c * d.conjugate() * model.weight(alpha)
    return total


def hs_norm(f: TruncSeries, model: SpaceModel) -> float:
    """The H^2_beta norm of ``f``."""
    _check_dim(f, model)
    return math.sqrt(sum(abs(c) ** 2 * model.weight(a) for a, c in f.items()))


def h2_norm(f: TruncSeries) -> float:
    """The plain Hardy-space norm, computed from the H^2 monomial norms."""
    return math.sqrt(sum(abs(c) ** 2 * h2_monomial_norm(a) for a, c in f.items()))


def hs_norm_via_derivative(f: TruncSeries, beta: float) -> float:
    """``sqrt(|f(0)|^2 + ||R^beta f||_{H^2}^2)`` by applying the radial derivative."""
    f0 = f[(0,) * f.n]
    return math.sqrt(abs(f0) ** 2 + h2_norm(radial_derivative(f, beta)) ** 2)


def bergman_norm(f: TruncSeries, t: float) -> float:
    """Norm of ``f`` in A^2_t."""
    return math.sqrt(sum(abs(c) ** 2 * bergman_monomial_norm(a, t) for a, c in f.items()))


def prop2_ratio(f: TruncSeries, model: SpaceModel, N: int) -> float:
    """Ratio of the integer-derivative Bergman norm to the H^2_beta norm.

    Numerator: ``sqrt(|f(0)|^2 + ||R^N f||^2_{A^2_t})`` with ``t = 2(N - beta) - 1``.
    """
    _check_dim(f, model)
    if int(N) != N or N < 0:
        raise ValueError("N must be a non-negative integer")
    if N <= model.beta:
        raise ValueError(f"need N > beta, got N={N}, beta={model.beta}")
    if f.is_zero():
        raise ValueError("ratio undefined for the zero function")
    t = 2 * (N - model.beta) - 1
    num = 0.0
    for alpha, c in f.items():
        k = sum(alpha)
        if k == 0:
            num += abs(c) ** 2
        else:
            num += abs(c) ** 2 * float(k) ** (2 * N) * bergman_monomial_norm(alpha, t)
    return math.sqrt(num) / hs_norm(f, model)


def prop2_degree_constant(model: SpaceModel, N: int, d: int) -> float:
    """Exact equivalence constant of :func:`prop2_ratio` on polynomials of degree <= d.

    Monomials are orthogonal for both norms, so the squared ratio of any
    polynomial is a convex combination of monomial squared ratios and the
    extremes are attained at monomials.
    """
    worst = 1.0
    for alpha in graded_indices(model.n, d):
        r = prop2_ratio(TruncSeries(model.n, d, {alpha: 1.0}), model, N)
        worst = max(worst, r, 1 / r)
    return worst


def prop2_study(
    model: SpaceModel, N: int, degrees: Sequence[int], samples: int = 100, seed: int = 0
) -> dict:
    """Sampled ratios on random polynomials of each degree, with per-degree constants.

    ``sampled_C`` is ``max(max r, 1/min r)`` over the samples of one degree;
    ``exact_C`` is :func:`prop2_degree_constant`.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for d in degrees:
        r = np.array([prop2_ratio(random_series(rng, model.n, d), model, N) for _ in range(samples)])
        rows.append(
            {
                "degree": int(d),
                "min": float(r.min()),
                "max": float(r.max()),
                "sampled_C": float(max(r.max(), 1 / r.min())),
                "exact_C": prop2_degree_constant(model, N, d),
            }
        )

    def drift(key: str) -> float:
        vals = [row[key] for row in rows]
        return (max(vals) - min(vals)) / min(vals)

    return {
        "beta": model.beta,
        "n": model.n,
        "N": N,
        "samples": samples,
        "seed": seed,
        "degrees": rows,
        "exact_drift": drift("exact_C"),
        "sampled_drift": drift("sampled_C"),
    }


def minimal_N(beta: float) -> int:
    """Smallest non-negative integer strictly greater than ``beta``."""
    return max(0, math.floor(beta) + 1)


def kernel_coefficients(model: SpaceModel, a: Sequence[complex], D: int) -> TruncSeries:
    """Degree-<=D section of the reproducing kernel ``K_a``.

    ``K_a(z) = sum_alpha conj(a^alpha) z^alpha / w_alpha``, so that
    ``<f, K_a>_beta = f(a)`` for every ``f`` of degree <= D.
    """
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    if a.shape != (model.n,):
        raise ValueError(f"point has shape {a.shape}, expected ({model.n},)")
    coeffs: dict[MultiIndex, complex] = {}
    for alpha in graded_indices(model.n, D):
        mono = 1 + 0j
        for ai, e in zip(a, alpha):
            if e:
                mono *= complex(ai) ** e
        coeffs[alpha] = mono.conjugate() / model.weight(alpha)
    return TruncSeries(model.n, D, coeffs)


class KernelConvergenceError(ArithmeticError):
    pass


def kernel_eval(
    model: SpaceModel,
    z: Sequence[complex],
    w: Sequence[complex],
    tol: float = 1e-12,
    max_terms: int = 1_000_000,
) -> tuple[complex, int]:
    """Reproducing kernel ``K(z, w)`` of H^2_beta.

    Sums ``1 + sum_{k>=1} k^{-2 beta} C(n+k-1, k) <z, w>^k`` until a geometric
    bound on the remainder drops below ``tol``.  Returns ``(value, terms)``.
    ``tol`` bounds truncation only; rounding adds about ``eps * sum |term|``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    if z.shape != (model.n,) or w.shape != (model.n,):
        raise ValueError("points must lie in C^n")
    if np.linalg.norm(z) >= 1 or np.linalg.norm(w) >= 1:
        raise ValueError("kernel points must lie in the open unit ball")
    q = complex(np.vdot(w, z))  # <z, w> = sum z_i conj(w_i)
    aq = abs(q)
    if aq >= 1:
        raise KernelConvergenceError(f"|<z,w>| = {aq} >= 1, series diverges")
    n, beta = model.n, model.beta
    total = 1 + 0j
    if aq == 0:
        return total, 1
    log_aq = math.log(aq)
    log_binom = 0.0  # log C(n+k-1, k)
    unit = q / aq
    phase = 1 + 0j
    for k in range(1, max_terms + 1):
        log_binom += math.log((n + k - 1) / k)
        phase *= unit
        # |term| = k^{-2beta} C(n+k-1,k) |q|^k, assembled in logs
        log_mag = -2 * beta * math.log(k) + log_binom + k * log_aq
        term = math.exp(log_mag)
        total += phase * term
        # ratio of successive terms is bounded, for all j >= k, by
        # ((k+1)/k)^{max(-2beta,0)} (n+k)/(k+1) |q|, which decreases in k
        rho = ((k + 1) / k) ** max(-2 * beta, 0.0) * (n + k) / (k + 1) * aq
        if rho < 1 and term * rho / (1 - rho) < tol:
            return total, k + 1
    raise KernelConvergenceError(f"kernel series did not reach tol={tol} in {max_terms} terms")


def special_kernel(name: str, n: int, zw: complex) -> complex:
    """Closed-form kernels of the classical spaces, as a function of ``<z, w>``."""
    if name == "hardy":
        return (1 - zw) ** (-n)
    if name == "bergman":
        return (1 - zw) ** (-(n + 1))
    if name == "drury-arveson":
        return 1 / (1 - zw)
    if name == "dirichlet":
        return 1 + np.log(1 / (1 - zw))
    raise ValueError(f"unknown special kernel {name!r}")


SPECIAL_BETA = {
    "hardy": lambda n: 0.0,
    "bergman": lambda n: -0.5,
    "drury-arveson": lambda n: (n - 1) / 2,
    "dirichlet": lambda n: n / 2,
}
