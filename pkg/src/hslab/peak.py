"""Peak functions ``f_k(z) = ((1 + conj(zeta) z) / 2)^k`` on the disk.

In H^2_beta of the disk the monomials ``z^j`` have square norm ``j^{2 beta}``
(and 1 for ``j = 0``), so

    ||f_k||^2 = 4^{-k} (1 + sum_{j=1}^{k} C(k, j)^2 j^{2 beta}),

which does not depend on the unimodular ``zeta``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .series import TruncSeries

LOG_SPACE_FROM = 300


def _check_zeta(zeta: complex) -> complex:
    zeta = complex(zeta)
    if abs(abs(zeta) - 1) > 1e-12:
        raise ValueError(f"zeta must be unimodular, got |zeta| = {abs(zeta)}")
    return zeta


def peak_series(k: int, zeta: complex = 1) -> TruncSeries:
    """The polynomial ``f_k`` as an n = 1 series of degree ``k``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    c = _check_zeta(zeta).conjugate()
    coeffs = {(j,): math.comb(k, j) * c**j / 2**k for j in range(k + 1)}
    return TruncSeries(1, k, coeffs)


def log_peak_norm_sq(k: int, beta: float) -> float:
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return 0.0
    if k <= LOG_SPACE_FROM:
        s = 1.0 + math.fsum(float(math.comb(k, j)) ** 2 * float(j) ** (2 * beta) for j in range(1, k + 1))
        return math.log(s) - k * math.log(4)
    j = np.arange(1, k + 1)
    lg = math.lgamma(k + 1)
    log_binom = lg - np.array([math.lgamma(x + 1) + math.lgamma(k - x + 1) for x in j])
    terms = np.concatenate([[0.0], 2 * log_binom + 2 * beta * np.log(j)])
    return float(logsumexp(terms)) - k * math.log(4)


def peak_norm_sq(k: int, beta: float) -> float:
    """``||f_k||^2`` in H^2_beta of the disk."""
    return math.exp(log_peak_norm_sq(k, beta))


def lemma12_ratio(beta: float, kmax: int) -> list[tuple[int, float]]:
    """``(k, ||f_k||^2 / (k+1)^{2 beta - 1})`` for ``k = 1..kmax``."""
    if kmax < 10:
        raise ValueError("kmax must be >= 10")
    return [
        (k, math.exp(log_peak_norm_sq(k, beta) - (2 * beta - 1) * math.log(k + 1)))
        for k in range(1, kmax + 1)
    ]


def observed_growth_exponent(beta: float, kmax: int) -> float:
    """Least-squares slope of ``log ||f_k||^2`` against ``log(k+1)`` on ``[kmax/2, kmax]``."""
    if kmax < 100:
        raise ValueError("kmax must be >= 100")
    ks = np.arange(kmax // 2, kmax + 1)
    y = np.array([log_peak_norm_sq(int(k), beta) for k in ks])
    slope, _ = np.polyfit(np.log(ks + 1.0), y, 1)
    return float(slope)


def weak_convergence_probe(beta: float, a: complex, kmax: int, zeta: complex = 1) -> list[float]:
    """``|f_k(a)| / ||f_k||`` for ``k = 1..kmax``; the normalised family pairs with ``K_a``.

    ``a`` may lie on the closed disk: ``f_k`` is a polynomial, and the kernel
    pairing reading applies for ``|a| < 1``.
    """
    a = complex(a)
    if abs(a) > 1 + 1e-12:
        raise ValueError("a must lie in the closed unit disk")
    base = (1 + _check_zeta(zeta).conjugate() * a) / 2
    out = []
    for k in range(1, kmax + 1):
        if base == 0:
            out.append(0.0)
            continue
        log_val = k * math.log(abs(base)) - 0.5 * log_peak_norm_sq(k, beta)
        out.append(math.exp(log_val))
    return out


@dataclass(frozen=True)
class PeakFamily:
    zeta: complex
    beta: float
    kmax: int

    def __post_init__(self) -> None:
        _check_zeta(self.zeta)
        if self.kmax < 1:
            raise ValueError("kmax must be >= 1")

    def __call__(self, k: int, z: complex) -> complex:
        if not 1 <= k <= self.kmax:
            raise ValueError(f"k must lie in 1..{self.kmax}")
        return ((1 + self.zeta.conjugate() * z) / 2) ** k

    def norms_sq(self) -> list[float]:
        return [peak_norm_sq(k, self.beta) for k in range(1, self.kmax + 1)]

    @property
    def argument(self) -> float:
        return cmath.phase(self.zeta)
