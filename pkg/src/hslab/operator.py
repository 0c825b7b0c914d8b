"""Finite matrix models of multiplication operators on H^2_beta.

The matrix of ``M_phi`` is taken in the orthonormal basis
``e_alpha = z^alpha / sqrt(w_alpha)``, ``|alpha| <= D``, ordered as in
:func:`hslab.series.graded_indices`.  It is the compression ``P_D M_phi P_D``:
columns of input degree ``<= D - deg(phi)`` are exact, the rest lose the terms
pushed past degree ``D``.  Every compression is lower triangular with
``phi(0)`` on the diagonal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .series import TruncSeries, evaluate, graded_indices, multiply
from .space import SpaceModel, kernel_coefficients

# dense-matrix size guard: C(40+2, 2) = 861 for n = 2
DEFAULT_DEGREE_CAP = {2: 40, 3: 16}


class ConvergenceError(ArithmeticError):
    """An iterative method hit its iteration cap."""


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    model: SpaceModel
    D: int
    entries: np.ndarray
    symbol: TruncSeries

    @property
    def basis(self) -> tuple[tuple[int, ...], ...]:
        return graded_indices(self.model.n, self.D)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def H(self) -> np.ndarray:
        return self.entries.conj().T

    def exact_columns(self) -> int:
        """Number of leading columns on which the compression is exact."""
        deg = max(self.symbol.degree, 0)
        return len(graded_indices(self.model.n, self.D - deg)) if self.D >= deg else 0

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            return self.entries @ other.entries
        return self.entries @ other


def build_matrix(
    phi: TruncSeries, model: SpaceModel, D: int, allow_large: bool = False
) -> OperatorMatrix:
    """Compression of ``M_phi`` to polynomials of degree <= ``D``."""
    if phi.n != model.n:
        raise ValueError(f"symbol dimension {phi.n} does not match model n={model.n}")
    if phi.degree > D:
        raise ValueError(f"symbol degree {phi.degree} exceeds truncation degree {D}")
    cap = DEFAULT_DEGREE_CAP.get(model.n)
    if cap is not None and D > cap and not allow_large:
        raise ValueError(f"D={D} exceeds the default cap {cap} for n={model.n}; pass allow_large")
    basis = graded_indices(model.n, D)
    pos = {a: i for i, a in enumerate(basis)}
    sqw = np.sqrt(model.weights(D))
    T = np.zeros((len(basis), len(basis)), dtype=complex)
    terms = list(phi.items())
    for j, alpha in enumerate(basis):
        for gamma, c in terms:
            target = tuple(a + g for a, g in zip(alpha, gamma))
            i = pos.get(target)
            if i is not None:
                T[i, j] += c * sqw[i] / sqw[j]
    T.setflags(write=False)
    return OperatorMatrix(model, D, T, phi)


def operator_norm(T: OperatorMatrix | np.ndarray, tol: float = 1e-10, maxiter: int = 100_000) -> float:
    """Largest singular value by power iteration on ``T^H T``.

    Starts from the all-ones vector.  Stops once the residual of the
    Rayleigh quotient, relative to the quotient itself, is below ``tol``.
    """
    A = T.entries if isinstance(T, OperatorMatrix) else np.asarray(T)
    if tol <= 0:
        raise ValueError("tol must be positive")
    x = np.ones(A.shape[1], dtype=complex)
    x /= np.linalg.norm(x)
    AH = A.conj().T
    rho = 0.0
    for _ in range(maxiter):
        y = AH @ (A @ x)
        rho = float(np.vdot(x, y).real)
        if rho <= 0:
            # x lies in the kernel; all-ones start only fails for A = 0
            if not np.any(A):
                return 0.0
            x = np.random.default_rng(0).standard_normal(A.shape[1]).astype(complex)
            x /= np.linalg.norm(x)
            continue
        res = np.linalg.norm(y - rho * x)
        x = y / np.linalg.norm(y)
        if res <= tol * rho:
            break
    else:
        raise ConvergenceError(f"power iteration did not converge in {maxiter} steps")
    y = AH @ (A @ x)
    return math.sqrt(max(float(np.vdot(x, y).real), rho))


def kernel_vector(model: SpaceModel, a: Sequence[complex], D: int) -> np.ndarray:
    """Coordinates of the degree-<=D kernel section ``K_a`` in the orthonormal basis."""
    K = kernel_coefficients(model, a, D)
    return K.coefficient_vector(D) * np.sqrt(model.weights(D))


def adjoint_apply_kernel(T: OperatorMatrix, a: Sequence[complex]) -> np.ndarray:
    """``T^H kappa_a`` where ``kappa_a`` is :func:`kernel_vector`."""
    return T.H @ kernel_vector(T.model, a, T.D)


def eigen_residual(T: OperatorMatrix, a: Sequence[complex]) -> float:
    """``||T^H kappa_a - conj(phi(a)) kappa_a|| / ||kappa_a||``."""
    kappa = kernel_vector(T.model, a, T.D)
    lam = np.conj(evaluate(T.symbol, a))
    return float(np.linalg.norm(T.H @ kappa - lam * kappa) / np.linalg.norm(kappa))


def reciprocal_series(phi: TruncSeries, D: int) -> TruncSeries:
    """Power series of ``1/phi`` through degree ``D``."""
    zero = (0,) * phi.n
    c0 = phi[zero]
    if c0 == 0:
        raise ZeroDivisionError("1/phi needs phi(0) != 0")
    terms = [(g, c) for g, c in phi.items() if any(g)]
    out: dict[tuple[int, ...], complex] = {zero: 1 / c0}
    for alpha in graded_indices(phi.n, D)[1:]:
        acc = 0j
        for gamma, c in terms:
            rest = tuple(a - g for a, g in zip(alpha, gamma))
            if min(rest) >= 0:
                acc += c * out.get(rest, 0j)
        out[alpha] = -acc / c0
    return TruncSeries(phi.n, D, out)


def power_norm_root(T: OperatorMatrix, m: int) -> float:
    """``||T^m||^{1/m}``, the Gelfand-formula estimate of the spectral radius."""
    P = np.linalg.matrix_power(T.entries, m)
    return float(np.linalg.norm(P, 2)) ** (1.0 / m)


def product_matrix(phi: TruncSeries, psi: TruncSeries, model: SpaceModel, D: int) -> OperatorMatrix:
    return build_matrix(multiply(phi, psi, D), model, D)
