"""Smallest singular values of ``lambda I - T`` over a grid of shifts.

The compressions built in :mod:`hslab.operator` are lower triangular with a
constant diagonal ``phi(0)``, so their eigenvalues carry no information about
the spectrum of ``M_phi``.  Resolvent norms do: ``s_min(lambda I - T)`` is
small exactly where ``lambda`` is (pseudo)spectral.

``s_min`` is computed as ``||A^{-1}||^{-1}`` with Lanczos on the Hermitian
operator ``A^{-H} A^{-1}``, where each application is one forward and one
backward triangular solve that only touches the stored nonzeros of ``T``.
All shifts of a chunk are processed together as columns of one array.
Every reduction is column-local, and chunk boundaries are fixed by the
chunk size alone, so threaded and sequential runs agree bit for bit.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class GridRegion:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    resolution: int

    def __post_init__(self) -> None:
        if self.resolution < 2:
            raise ValueError("grid resolution must be >= 2")
        if not (self.re_max > self.re_min and self.im_max > self.im_min):
            raise ValueError("grid rectangle is degenerate")

    @classmethod
    def square(cls, half_width: float, resolution: int) -> "GridRegion":
        return cls(-half_width, half_width, -half_width, half_width, resolution)

    @property
    def re(self) -> np.ndarray:
        return np.linspace(self.re_min, self.re_max, self.resolution)

    @property
    def im(self) -> np.ndarray:
        return np.linspace(self.im_min, self.im_max, self.resolution)

    def points(self) -> np.ndarray:
        """Complex shifts, shape ``(resolution, resolution)``; rows follow ``im``."""
        re, im = np.meshgrid(self.re, self.im)
        return re + 1j * im

    @property
    def spacing(self) -> float:
        """Largest distance between horizontally or vertically adjacent points."""
        return max(
            (self.re_max - self.re_min) / (self.resolution - 1),
            (self.im_max - self.im_min) / (self.resolution - 1),
        )

    def to_dict(self) -> dict:
        return {
            "re_min": self.re_min,
            "re_max": self.re_max,
            "im_min": self.im_min,
            "im_max": self.im_max,
            "resolution": self.resolution,
        }


@dataclass
class ScalarField:
    grid: GridRegion
    values: np.ndarray
    converged: np.ndarray
    metadata: dict = field(default_factory=dict)

    def sublevel(self, eps: float) -> np.ndarray:
        return self.values < eps

    @property
    def points(self) -> np.ndarray:
        return self.grid.points()


class _TriangularStructure:
    """Sparse row/column access pattern of a lower-triangular matrix."""

    def __init__(self, T: np.ndarray):
        T = np.asarray(T, dtype=complex)
        if T.ndim != 2 or T.shape[0] != T.shape[1]:
            raise ValueError("T must be square")
        if np.any(np.triu(T, 1)):
            raise ValueError("triangular solver needs a lower-triangular T")
        self.N = T.shape[0]
        self.diag = np.diag(T).copy()
        strict = np.tril(T, -1)
        # forward: x_i = (b_i + sum_{j<i} T_ij x_j) / (lam - T_ii)
        self.fwd = []
        for i in range(self.N):
            cols = np.nonzero(strict[i])[0]
            self.fwd.append([(strict[i, j], j) for j in cols])
        # backward with A^H: y_i = (b_i + sum_{j>i} conj(T_ji) y_j) / conj(lam - T_ii)
        self.bwd = []
        for i in range(self.N):
            rows = np.nonzero(strict[:, i])[0]
            self.bwd.append([(np.conj(strict[j, i]), j) for j in rows])
        self.fro = float(np.linalg.norm(T))

    def forward(self, B: np.ndarray, inv: np.ndarray, X: np.ndarray) -> None:
        for i in range(self.N):
            row = X[i]
            np.copyto(row, B[i])
            for v, j in self.fwd[i]:
                row += v * X[j]
            row *= inv[i]

    def backward(self, B: np.ndarray, inv_conj: np.ndarray, Y: np.ndarray) -> None:
        for i in range(self.N - 1, -1, -1):
            row = Y[i]
            np.copyto(row, B[i])
            for v, j in self.bwd[i]:
                row += v * Y[j]
            row *= inv_conj[i]


def _colsum(Z: np.ndarray) -> np.ndarray:
    # a single column would be reduced pairwise, a wider array row by row;
    # pad so the summation order never depends on the batch width
    if Z.shape[1] == 1:
        return np.concatenate([Z, np.zeros_like(Z)], axis=1).sum(axis=0)[:1]
    return Z.sum(axis=0)


def _colnorm(Z: np.ndarray) -> np.ndarray:
    return np.sqrt(_colsum(Z.real**2 + Z.imag**2))


def _top_ritz(alphas: np.ndarray, betas: np.ndarray) -> np.ndarray:
    """Largest eigenvalue of each column's Lanczos tridiagonal."""
    k, G = alphas.shape
    M = np.zeros((G, k, k))
    idx = np.arange(k)
    M[:, idx, idx] = alphas.T
    if k > 1:
        M[:, idx[:-1], idx[1:]] = betas[: k - 1].T
        M[:, idx[1:], idx[:-1]] = betas[: k - 1].T
    return np.linalg.eigvalsh(M)[:, -1]


def _compact(live: np.ndarray) -> np.ndarray | None:
    """Column selector that drops finished columns but keeps width >= 2.

    numpy reduces a single column pairwise and runs length-1 complex
    arithmetic on a scalar path; both round differently from a batch.
    """
    if live.all():
        return None
    keep = live.copy()
    if keep.sum() < 2:
        dead = np.nonzero(~keep)[0]
        keep[dead[: 2 - keep.sum()]] = True
    return keep


def _smin_chunk(
    S: _TriangularStructure, lam: np.ndarray, tol: float, maxiter: int, check_every: int
) -> tuple[np.ndarray, np.ndarray]:
    G = lam.size
    if G == 1:
        v, c = _smin_chunk(S, np.array([lam[0], lam[0] + 1.0]), tol, maxiter, check_every)
        return v[:1], c[:1]
    N = S.N
    values = np.empty(G)
    conv = np.zeros(G, dtype=bool)

    den = lam[None, :] - S.diag[:, None]
    singular = np.any(den == 0, axis=0)
    values[singular] = 0.0
    conv[singular] = True

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        inv = 1.0 / np.where(den == 0, 1.0, den)
        inv_c = inv.conj()
        floor = 64 * EPS * (np.abs(lam) + S.fro)

        q = np.full((N, G), 1 / np.sqrt(N), dtype=complex)
        y = np.empty_like(q)
        S.forward(q, inv, y)
        ynorm = _colnorm(y)
        est0 = np.where(np.isfinite(ynorm) & (ynorm > 0), 1.0 / ynorm, 0.0)
        # below the rounding floor the value is not resolvable in binary64
        tiny = (est0 <= floor) & ~singular
        values[tiny] = est0[tiny]
        conv[tiny] = True

        active = np.arange(G)
        live = ~(singular | tiny)
        q_prev = np.zeros_like(q)
        z = np.empty_like(q)
        alphas = np.zeros((maxiter, G))
        betas = np.zeros((maxiter, G))
        last = np.full(G, np.inf)
        beta_prev = np.zeros(G)

        def select(keep):
            nonlocal active, live, inv, inv_c, q, q_prev, y, z, alphas, betas, last, beta_prev
            active, live = active[keep], live[keep]
            inv, inv_c = inv[:, keep], inv_c[:, keep]
            q, q_prev, y = q[:, keep], q_prev[:, keep], y[:, keep]
            z = np.empty_like(q)
            alphas, betas = alphas[:, keep], betas[:, keep]
            last, beta_prev = last[keep], beta_prev[keep]

        keep = _compact(live)
        if keep is not None:
            select(keep)

        for k in range(maxiter):
            if not live.any():
                break
            if k > 0:
                S.forward(q, inv, y)
            S.backward(y, inv_c, z)
            a = _colsum(q.conj() * z).real
            z -= a * q + beta_prev * q_prev
            b = _colnorm(z)
            alphas[k] = a
            broke = ~(b > 1e-13 * np.abs(a))
            safe_b = np.where(broke, 1.0, b)
            q_prev, q = q, np.where(broke, 0.0, z / safe_b)
            beta_prev = np.where(broke, 0.0, b)
            betas[k] = beta_prev

            steps = k + 1
            # fixed schedule: a check must not depend on other columns
            if steps % check_every and steps != maxiter:
                continue
            theta = _top_ritz(alphas[:steps], betas[:steps])
            s = 1.0 / np.sqrt(theta)
            done = (np.abs(s - last) <= tol * s) | (beta_prev == 0)
            last = s
            finish = live & (done | (steps == maxiter))
            values[active[finish]] = s[finish]
            conv[active[finish & done]] = True
            live = live & ~finish
            keep = _compact(live)
            if keep is not None:
                select(keep)
    return values, conv


def smin_values(
    T: np.ndarray,
    lams: np.ndarray,
    tol: float = 1e-8,
    maxiter: int = 300,
    chunk: int = 2048,
    threads: int | None = None,
    check_every: int = 5,
) -> tuple[np.ndarray, np.ndarray]:
    """``s_min(lam I - T)`` for every ``lam`` in ``lams``.

    Returns ``(values, converged)`` with the shape of ``lams``.  Points whose
    Lanczos estimate is still moving after ``maxiter`` steps get
    ``converged = False`` and carry their last estimate.
    """
    lam = np.asarray(lams, dtype=complex)
    shape = lam.shape
    flat = lam.ravel()
    S = _TriangularStructure(T)
    if threads is None:
        threads = int(os.environ.get("HS_THREADS", "1") or 1)
    starts = list(range(0, flat.size, chunk))

    def work(start: int):
        return _smin_chunk(S, flat[start : start + chunk], tol, maxiter, check_every)

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = [work(s) for s in starts]
    values = np.concatenate([p[0] for p in parts]) if parts else np.empty(0)
    conv = np.concatenate([p[1] for p in parts]) if parts else np.empty(0, dtype=bool)
    return values.reshape(shape), conv.reshape(shape)


def smin_dense(T: np.ndarray, lam: complex) -> float:
    """Reference value from a full SVD (small matrices only)."""
    A = lam * np.eye(T.shape[0]) - np.asarray(T)
    return float(np.linalg.svd(A, compute_uv=False)[-1])
