"""Spectra, essential spectra and Fredholm indices of multiplication operators.

Spectral sets are represented by sampled surrogates: image clouds of the
symbol over the ball or over boundary shells, resolvent sublevel sets of a
compression, and winding numbers of boundary curves.
"""
from __future__ import annotations

import math
import dataclasses
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree
from scipy import optimize
from scipy.special import ndtri
from scipy.stats import qmc

from .operator import OperatorMatrix
from .pseudospectra import GridRegion, ScalarField, smin_values
from .series import TruncSeries, evaluate, evaluate_many
from .space import SpaceModel


def _pairs(z: np.ndarray) -> list[list[float]]:
    z = np.asarray(z, dtype=complex).ravel()
    return np.column_stack([z.real, z.imag]).tolist()


@dataclass
class SpectrumReport:
    kind: str  # spectrum | pseudospectrum | essential | index
    points: np.ndarray | None = None
    field: ScalarField | None = None
    metadata: dict = dataclasses.field(default_factory=dict)
    clouds: list[tuple[float, np.ndarray]] | None = None
    verdict: "FredholmVerdict | None" = None

    def __post_init__(self) -> None:
        if self.kind not in ("spectrum", "pseudospectrum", "essential", "index"):
            raise ValueError(f"unknown report kind {self.kind!r}")
        for arr in [self.points] + [c for _, c in self.clouds or []]:
            if arr is not None and not np.all(np.isfinite(arr)):
                raise ValueError("report points must be finite")
        if self.field is not None and not np.all(np.isfinite(self.field.values)):
            raise ValueError("report field must be finite")

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind, "metadata": self.metadata}
        if self.points is not None:
            out["points"] = _pairs(self.points)
        if self.clouds is not None:
            out["clouds"] = [{"r": r, "points": _pairs(p)} for r, p in self.clouds]
        if self.field is not None:
            out["field"] = {
                "grid": self.field.grid.to_dict(),
                "smin": self.field.values.tolist(),
                "converged": self.field.converged.tolist(),
            }
        if self.verdict is not None:
            out["verdict"] = self.verdict.to_dict()
        return out


# -- sampling -----------------------------------------------------------


def ball_samples(
    n: int, samples: int, seed: int = 0, r_inner: float = 0.0, r_outer: float = 1.0
) -> np.ndarray:
    """Quasi-random points, uniform in volume, on the shell ``r_inner <= |z| < r_outer``.

    Uses a scrambled Halton sequence, so the cloud is a deterministic function
    of ``seed``.  Returns shape ``(samples, n)``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if not 0 <= r_inner < r_outer <= 1:
        raise ValueError("need 0 <= r_inner < r_outer <= 1")
    m = 2 * n
    if n == 1:
        u = qmc.Halton(d=2, scramble=True, seed=seed).random(samples)
        direction = np.exp(2j * np.pi * u[:, 0])[:, None]
        ur = u[:, 1]
    else:
        u = qmc.Halton(d=m + 1, scramble=True, seed=seed).random(samples)
        g = ndtri(np.clip(u[:, :m], 1e-12, 1 - 1e-12))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        direction = g[:, 0::2] + 1j * g[:, 1::2]
        ur = u[:, m]
    lo, hi = r_inner**m, r_outer**m
    radius = (lo + ur * (hi - lo)) ** (1.0 / m)
    return direction * radius[:, None]


def sphere_samples(n: int, samples: int, radius: float, seed: int = 0) -> np.ndarray:
    """Quasi-random points on the sphere ``|z| = radius``."""
    if n == 1:
        t = 2 * np.pi * (np.arange(samples) + 0.5) / samples
        return (radius * np.exp(1j * t))[:, None]
    m = 2 * n
    u = qmc.Halton(d=m, scramble=True, seed=seed).random(samples)
    g = ndtri(np.clip(u, 1e-12, 1 - 1e-12))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return radius * (g[:, 0::2] + 1j * g[:, 1::2])


def spectrum_image(phi: TruncSeries, samples: int = 100_000, seed: int = 0) -> np.ndarray:
    """``phi`` evaluated on a quasi-random cloud filling the ball."""
    return evaluate_many(phi, ball_samples(phi.n, samples, seed))


def essential_cluster(
    phi: TruncSeries, radii: Sequence[float], samples: int = 100_000, seed: int = 0
) -> list[tuple[float, np.ndarray]]:
    """Image clouds of ``phi`` on the shells ``r < |z| < 1``, one per radius."""
    radii = [float(r) for r in radii]
    if not radii or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be a non-empty strictly increasing list")
    if radii[0] <= 0 or radii[-1] >= 1:
        raise ValueError("radii must lie in (0, 1)")
    return [(r, evaluate_many(phi, ball_samples(phi.n, samples, seed, r_inner=r))) for r in radii]


def hull_area(points: np.ndarray) -> float:
    pts = np.column_stack([np.real(points), np.imag(points)])
    if len(np.unique(pts, axis=0)) < 3:
        return 0.0
    try:
        return float(ConvexHull(pts).volume)
    except QhullError:  # collinear cloud
        return 0.0


def hausdorff_to_circle(points: np.ndarray, radius: float = 1.0, circle_samples: int = 20_000) -> float:
    """Hausdorff distance between a point cloud and the circle ``|w| = radius``."""
    pts = np.asarray(points, dtype=complex)
    to_circle = float(np.max(np.abs(np.abs(pts) - radius)))
    t = 2 * np.pi * np.arange(circle_samples) / circle_samples
    circle = radius * np.exp(1j * t)
    tree = cKDTree(np.column_stack([pts.real, pts.imag]))
    d, _ = tree.query(np.column_stack([circle.real, circle.imag]))
    # the circle discretisation adds at most half a chord
    chord = radius * math.pi / circle_samples
    return max(to_circle, float(np.max(d)) + chord)


# -- resolvent fields ---------------------------------------------------


def smin_field(
    T: OperatorMatrix | np.ndarray,
    grid: GridRegion,
    tol: float = 1e-8,
    maxiter: int = 300,
    threads: int | None = None,
) -> ScalarField:
    """``s_min(lambda I - T)`` at every grid point."""
    A = T.entries if isinstance(T, OperatorMatrix) else np.asarray(T)
    values, conv = smin_values(A, grid.points(), tol=tol, maxiter=maxiter, threads=threads)
    meta = {"tol": tol, "maxiter": maxiter, "dim": int(A.shape[0])}
    if isinstance(T, OperatorMatrix):
        meta.update({"beta": T.model.beta, "n": T.model.n, "D": T.D})
    return ScalarField(grid, values, conv, meta)


def disk_containment(field: ScalarField, eps: float, inner: float, outer: float) -> dict:
    """Check ``disk(inner) <= {s_min < eps} <= disk(outer)`` on the grid."""
    lam = field.points
    mod = np.abs(lam)
    sub = field.sublevel(eps)
    misses_inner = int(np.sum((mod <= inner) & ~sub))
    escapes_outer = int(np.sum((mod > outer) & sub))
    radius = float(mod[sub].max()) if sub.any() else 0.0
    return {
        "contains_inner": misses_inner == 0,
        "inside_outer": escapes_outer == 0,
        "inner_misses": misses_inner,
        "outer_escapes": escapes_outer,
        "sublevel_radius": radius,
    }


# -- winding number and Fredholm theory -----------------------------------


class NotFredholmAtRadius(ArithmeticError):
    """The sampled curve passes too close to 0 to fix its winding number."""


def winding_number(
    phi: TruncSeries, r: float, M: int = 256, max_refinements: int = 14, floor: float = 1e-12
) -> int:
    """Winding number about 0 of ``t -> phi(r e^{it})``.

    Sums principal-branch argument increments; the sample count doubles until
    every increment is below pi/2.
    """
    if phi.n != 1:
        raise ValueError("winding number is defined for n = 1 symbols")
    if not 0 < r < 1:
        raise ValueError("radius must lie in (0, 1)")
    if M < 64:
        raise ValueError("need at least 64 samples")
    for _ in range(max_refinements + 1):
        t = 2 * np.pi * np.arange(M) / M
        w = evaluate_many(phi, r * np.exp(1j * t))
        scale = max(float(np.max(np.abs(w))), 1.0)
        if np.min(np.abs(w)) <= floor * scale:
            raise NotFredholmAtRadius(f"phi nearly vanishes on |z| = {r}")
        inc = np.angle(np.roll(w, -1) / w)
        if np.max(np.abs(inc)) < np.pi / 2:
            total = float(np.sum(inc)) / (2 * np.pi)
            k = round(total)
            if abs(total - k) > 1e-6:
                raise NotFredholmAtRadius(f"non-integral winding sum {total}")
            return int(k)
        M *= 2
    raise NotFredholmAtRadius(f"refinement did not resolve the curve at |z| = {r}")


@dataclass
class FredholmVerdict:
    status: str  # invertible | fredholm | not_fredholm | inconclusive
    index: int | None
    radius: float | None
    winding: int | None
    probes: list[dict]
    metadata: dict = dataclasses.field(default_factory=dict)

    EXIT_CODES = {"invertible": 0, "fredholm": 1, "not_fredholm": 2, "inconclusive": 3}

    @property
    def exit_code(self) -> int:
        return self.EXIT_CODES[self.status]

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "index": self.index,
            "radius": self.radius,
            "winding": self.winding,
            "probes": self.probes,
            "metadata": self.metadata,
        }


def shell_min_modulus(
    psi: TruncSeries, r: float, samples: int = 20_000, seed: int = 0, polish: int = 8
) -> float:
    """``min |psi|`` on the closed shell ``r <= |z| <= 1``.

    Quasi-random samples locate candidates; the ``polish`` best are refined by
    bound-constrained local minimisation over (radius, direction).  Sampling
    alone misses thin preimages, e.g. ``z1 = lam`` on the shell in C^2.
    """
    pts = np.vstack(
        [
            ball_samples(psi.n, samples, seed, r_inner=r),
            sphere_samples(psi.n, samples, r, seed),
            sphere_samples(psi.n, samples, 1.0, seed + 1),
        ]
    )
    mod = np.abs(evaluate_many(psi, pts))
    best = float(np.min(mod))
    if polish <= 0 or psi.degree < 1:
        return best

    def to_point(x):
        u = x[1:].view(complex)
        return x[0] * u / np.linalg.norm(u)

    def objective(x):
        return float(abs(evaluate(psi, to_point(x))) ** 2)

    bounds = [(r, 1.0)] + [(None, None)] * (2 * psi.n)
    for i in np.argsort(mod)[:polish]:
        p = pts[i]
        x0 = np.concatenate([[np.clip(np.linalg.norm(p), r, 1.0)], np.column_stack([p.real, p.imag]).ravel()])
        res = optimize.minimize(objective, x0, method="L-BFGS-B", bounds=bounds)
        if np.all(np.isfinite(res.x)) and np.linalg.norm(res.x[1:]) > 0:
            best = min(best, math.sqrt(max(res.fun, 0.0)))
    return best


def fredholm_index(
    phi: TruncSeries,
    lam: complex,
    model: SpaceModel | None = None,
    r_probe: Sequence[float] = (0.9, 0.99, 0.999),
    delta: float = 1e-3,
    samples: int = 20_000,
    seed: int = 0,
) -> FredholmVerdict:
    """Classify ``lam I - M_phi`` as invertible, Fredholm or not Fredholm.

    ``lam - phi`` is tested for ``|lam - phi| >= delta`` on shell samples at
    each probe radius.  On the first passing radius the index (for n = 1) is
    minus the winding number of ``lam - phi`` on that circle; index 0 there
    means ``lam - phi`` has no zeros at all and the operator is invertible.
    For n > 1 a passing shell already forces invertibility.
    """
    psi = lam - phi
    probes = []
    boundary_case = False
    meta = {"lambda": [complex(lam).real, complex(lam).imag], "delta": delta,
            "r_probe": list(r_probe), "samples": samples, "seed": seed, "n": phi.n}
    if model is not None:
        meta["beta"] = model.beta
    for r in r_probe:
        m = shell_min_modulus(psi, r, samples, seed)
        probe = {"r": r, "min_modulus": m}
        probes.append(probe)
        if m >= delta:
            if phi.n > 1:
                return FredholmVerdict("invertible", 0, r, None, probes, meta)
            try:
                w = winding_number(psi, r)
            except NotFredholmAtRadius as exc:
                probe["error"] = str(exc)
                continue
            status = "invertible" if w == 0 else "fredholm"
            return FredholmVerdict(status, -w, r, w, probes, meta)
        if m > delta / 2:
            boundary_case = True
            probe["boundary_case"] = True
    if boundary_case:
        return FredholmVerdict("inconclusive", None, None, None, probes, meta)
    return FredholmVerdict("not_fredholm", None, None, None, probes, meta)


def root_count_inside(coeffs_low_to_high: Sequence[complex], r: float) -> int:
    """Zeros of a univariate polynomial in ``|z| < r`` via its companion matrix."""
    c = np.trim_zeros(np.asarray(coeffs_low_to_high, dtype=complex), "b")
    if c.size <= 1:
        return 0
    roots = np.roots(c[::-1])
    return int(np.sum(np.abs(roots) < r))
