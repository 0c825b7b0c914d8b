"""Command-line front end: one subcommand per experiment, one report per run.

Exit codes: 0 success, 1 check failed (``index``: Fredholm), 2 ``index`` not
Fredholm, 3 numerical flags or an inconclusive verdict, 64 usage error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import identity, operator, peak, space, spectral
from .pseudospectra import GridRegion
from .symbols import SymbolError, parse_exact, parse_symbol

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_NOT_FREDHOLM = 2
EXIT_NUMERICAL = 3
EXIT_USAGE = 64

CSV_COMMANDS = {"pseudospectrum", "spectrum-image", "essential", "peak-norms", "op-matrix"}


class UsageError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    subcommand: str = "verify-identity"
    phi: str = "z"
    beta: float = 0.5
    n: int = 1
    degree: int = 40
    seed: int = identity.SEED
    output: str | None = None
    format: str | None = None
    # identity suites
    nmax: int = 6
    trials: int = 200
    max_degree: int = 6
    # grids and clouds
    eps: float = 1e-2
    grid: int = 201
    half_width: float = 1.5
    inner: float = 0.9
    outer: float = 1.1
    samples: int = 100_000
    radii: list = field(default_factory=lambda: [0.9, 0.99, 0.999])
    allow_large: bool = False
    dump: bool = False
    # Fredholm verdicts
    lam: str = "0"
    r_probe: list = field(default_factory=lambda: [0.9, 0.99, 0.999])
    delta: float = 1e-3
    # points, norms and peaks
    point: str = "0"
    w: str = "0"
    tol: float | None = None
    N: int | None = None
    degrees: list = field(default_factory=lambda: [5, 10, 20, 30])
    kmax: int = 200

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise UsageError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    @property
    def output_format(self) -> str:
        fmt = self.format or ("csv" if self.subcommand in CSV_COMMANDS else "json")
        if fmt not in ("csv", "json"):
            raise UsageError(f"unknown format {fmt!r}")
        return fmt

    @property
    def output_path(self) -> Path:
        return Path(self.output or f"{self.subcommand}.{self.output_format}")


@dataclass
class Outcome:
    report: dict | None = None  # JSON body
    rows: list | None = None  # CSV body, first row is the header
    summary: str = ""
    status: int = EXIT_OK
    flags: list = field(default_factory=list)


# -- value helpers --------------------------------------------------------


def _complex(text: str) -> complex:
    try:
        poly = parse_exact(text, 1)
    except SymbolError as exc:
        raise UsageError(f"bad complex number {text!r}: {exc}") from exc
    if any(any(k) for k in poly):
        raise UsageError(f"{text!r} is not a constant")
    re_, im_ = poly.get((0,), (0, 0))
    return complex(float(re_), float(im_))


def _point(text: str, n: int) -> np.ndarray:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != n:
        raise UsageError(f"point {text!r} needs {n} coordinates")
    return np.array([_complex(p) for p in parts])


def _pair(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _symbol(cfg: ExperimentConfig):
    try:
        return parse_symbol(cfg.phi, cfg.n)
    except SymbolError as exc:
        raise UsageError(str(exc)) from exc


def _model(cfg: ExperimentConfig) -> space.SpaceModel:
    return space.SpaceModel(cfg.n, float(cfg.beta))


def _matrix(cfg: ExperimentConfig, phi) -> operator.OperatorMatrix:
    try:
        return operator.build_matrix(phi, _model(cfg), cfg.degree, allow_large=cfg.allow_large)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# -- subcommands ----------------------------------------------------------


def _verify_identity(cfg: ExperimentConfig) -> Outcome:
    res = identity.verify_identity(cfg.nmax, cfg.trials, cfg.seed, cfg.max_degree)
    ok = res["all_zero"]
    return Outcome(
        report=res,
        summary=f"identity residual zero for N<= {cfg.nmax} x {cfg.trials} pairs: {ok}",
        status=EXIT_OK if ok else EXIT_FAILED,
    )


def _quotient_check(cfg: ExperimentConfig) -> Outcome:
    res = identity.check_quotient(cfg.nmax, cfg.trials, cfg.seed, cfg.max_degree)
    ok = res["all_equal"]
    return Outcome(
        report=res,
        summary=f"closed form equals iterated quotient rule for N<= {cfg.nmax} x {cfg.trials}: {ok}",
        status=EXIT_OK if ok else EXIT_FAILED,
    )


def _space_norm(cfg: ExperimentConfig) -> Outcome:
    phi, model = _symbol(cfg), _model(cfg)
    tol = cfg.tol if cfg.tol is not None else 1e-10
    value = space.hs_norm(phi, model)
    other = space.hs_norm_via_derivative(phi, model.beta)
    diff = abs(value - other) / max(value, 1e-300)
    ok = diff <= tol
    return Outcome(
        report={"beta": model.beta, "n": model.n, "value": value, "tolerance": tol,
                "via_derivative": other, "relative_difference": diff},
        summary=f"||phi||_beta = {value:.15g} (derivative route differs by {diff:.2e})",
        status=EXIT_OK if ok else EXIT_FAILED,
    )


def _kernel_eval(cfg: ExperimentConfig) -> Outcome:
    model = _model(cfg)
    tol = cfg.tol if cfg.tol is not None else 1e-12
    z, w = _point(cfg.point, cfg.n), _point(cfg.w, cfg.n)
    try:
        value, terms = space.kernel_eval(model, z, w, tol=tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    except space.KernelConvergenceError as exc:
        return Outcome(report={"beta": model.beta, "n": model.n, "value": None, "tolerance": tol},
                       summary=str(exc), status=EXIT_NUMERICAL, flags=["nonconvergence"])
    return Outcome(
        report={"beta": model.beta, "n": model.n, "value": _pair(value), "tolerance": tol, "terms": terms},
        summary=f"K(z,w) = {value:.15g} after {terms} terms",
    )


def _prop2_check(cfg: ExperimentConfig) -> Outcome:
    model = _model(cfg)
    N = cfg.N if cfg.N is not None else space.minimal_N(model.beta)
    tol = cfg.tol if cfg.tol is not None else 0.10
    try:
        study = space.prop2_study(model, N, cfg.degrees, cfg.samples, cfg.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    C = max(row["exact_C"] for row in study["degrees"])
    inside = all(1 / C <= row["min"] and row["max"] <= C for row in study["degrees"])
    ok = inside and study["exact_drift"] <= tol
    report = {"beta": model.beta, "n": model.n, "value": C, "tolerance": tol, "N": N,
              "samples_inside": inside, "study": study}
    return Outcome(
        report=report,
        summary=f"ratio within [1/C, C], C = {C:.6g}, degree drift {study['exact_drift']:.3g}: {ok}",
        status=EXIT_OK if ok else EXIT_FAILED,
    )


def _op_norm(cfg: ExperimentConfig) -> Outcome:
    T = _matrix(cfg, _symbol(cfg))
    tol = cfg.tol if cfg.tol is not None else 1e-10
    base = {"beta": T.model.beta, "n": T.model.n, "D": T.D, "dim": T.dim, "tolerance": tol}
    try:
        value = operator.operator_norm(T, tol=tol)
    except operator.ConvergenceError as exc:
        return Outcome(report={**base, "value": None}, summary=str(exc),
                       status=EXIT_NUMERICAL, flags=["nonconvergence"])
    return Outcome(report={**base, "value": value}, summary=f"||T_D|| = {value:.12g} (dim {T.dim})")


def _op_matrix(cfg: ExperimentConfig) -> Outcome:
    T = _matrix(cfg, _symbol(cfg))
    A = T.entries
    info = {"beta": T.model.beta, "n": T.model.n, "D": T.D, "dim": T.dim,
            "nonzeros": int(np.count_nonzero(A)), "exact_columns": T.exact_columns(),
            "lower_triangular": not np.any(np.triu(A, 1))}
    if not cfg.dump:
        return Outcome(report=info, summary=f"{T.dim}x{T.dim} compression, {info['nonzeros']} nonzeros")
    basis = T.basis
    rows = [["row", "col", "alpha_row", "alpha_col", "re", "im"]]
    for i, j in zip(*np.nonzero(A)):
        rows.append([int(i), int(j), " ".join(map(str, basis[i])), " ".join(map(str, basis[j])),
                     float(A[i, j].real), float(A[i, j].imag)])
    return Outcome(rows=rows, summary=f"dumped {len(rows) - 1} nonzero entries of a {T.dim}x{T.dim} matrix")


def _adjoint_kernel_check(cfg: ExperimentConfig) -> Outcome:
    phi = _symbol(cfg)
    T = _matrix(cfg, phi)
    tol = cfg.tol if cfg.tol is not None else 1e-8
    pts = 0.5 * spectral.ball_samples(cfg.n, cfg.samples, cfg.seed)
    res = [operator.eigen_residual(T, a) for a in pts]
    worst = float(max(res))
    ok = worst <= tol
    return Outcome(
        report={"beta": T.model.beta, "n": T.model.n, "D": T.D, "points": len(res),
                "max_residual": worst, "tolerance": tol, "passed": ok},
        summary=f"max relative residual {worst:.3e} over {len(res)} points (tol {tol:g})",
        status=EXIT_OK if ok else EXIT_FAILED,
    )


def _pseudospectrum(cfg: ExperimentConfig) -> Outcome:
    T = _matrix(cfg, _symbol(cfg))
    grid = GridRegion.square(cfg.half_width, cfg.grid)
    tol = cfg.tol if cfg.tol is not None else 1e-8
    fld = spectral.smin_field(T, grid, tol=tol)
    check = spectral.disk_containment(fld, cfg.eps, cfg.inner, cfg.outer)
    bad = int(np.sum(~fld.converged))
    flags = [f"nonconvergence: {bad} points"] if bad else []
    summary = (
        f"eps={cfg.eps:g} sublevel set contains disk({cfg.inner:g}): {check['contains_inner']}, "
        f"inside disk({cfg.outer:g}): {check['inside_outer']}"
    )
    meta = {**fld.metadata, "eps": cfg.eps, "grid": grid.to_dict(), **check}
    status = EXIT_NUMERICAL if bad else EXIT_OK
    if cfg.output_format == "json":
        rep = spectral.SpectrumReport("pseudospectrum", field=fld, metadata=meta)
        return Outcome(report=rep.to_dict(), summary=summary, status=status, flags=flags)
    rows = [["re", "im", "smin", "converged"]]
    lam = fld.points
    for z, s, c in zip(lam.ravel(), fld.values.ravel(), fld.converged.ravel()):
        rows.append([float(z.real), float(z.imag), float(s), int(c)])
    return Outcome(rows=rows, summary=summary, status=status, flags=flags)


def _spectrum_image(cfg: ExperimentConfig) -> Outcome:
    phi = _symbol(cfg)
    pts = spectral.spectrum_image(phi, cfg.samples, cfg.seed)
    area = spectral.hull_area(pts)
    summary = f"{cfg.samples} image points, convex hull area {area:.6g}"
    if cfg.output_format == "json":
        meta = {"n": phi.n, "samples": cfg.samples, "seed": cfg.seed, "hull_area": area}
        rep = spectral.SpectrumReport("spectrum", points=pts, metadata=meta)
        return Outcome(report=rep.to_dict(), summary=summary)
    rows = [["re", "im"]] + [[float(p.real), float(p.imag)] for p in pts]
    return Outcome(rows=rows, summary=summary)


def _essential(cfg: ExperimentConfig) -> Outcome:
    phi = _symbol(cfg)
    try:
        clouds = spectral.essential_cluster(phi, cfg.radii, cfg.samples, cfg.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    shells = [{"r": r, "hull_area": spectral.hull_area(p),
               "hausdorff_to_unit_circle": spectral.hausdorff_to_circle(p)} for r, p in clouds]
    last = shells[-1]
    summary = (f"r={last['r']:g}: hull area {last['hull_area']:.6g}, "
               f"Hausdorff distance to unit circle {last['hausdorff_to_unit_circle']:.3g}")
    if cfg.output_format == "json":
        meta = {"n": phi.n, "samples": cfg.samples, "seed": cfg.seed, "shells": shells}
        rep = spectral.SpectrumReport("essential", clouds=clouds, metadata=meta)
        return Outcome(report=rep.to_dict(), summary=summary)
    rows = [["r", "re", "im"]]
    for r, pts in clouds:
        rows.extend([r, float(p.real), float(p.imag)] for p in pts)
    return Outcome(rows=rows, summary=summary)


def _index(cfg: ExperimentConfig) -> Outcome:
    phi = _symbol(cfg)
    lam = _complex(cfg.lam)
    verdict = spectral.fredholm_index(phi, lam, _model(cfg), cfg.r_probe, cfg.delta, cfg.samples, cfg.seed)
    rep = spectral.SpectrumReport("index", metadata=verdict.metadata, verdict=verdict)
    flags = ["inconclusive: boundary case"] if verdict.status == "inconclusive" else []
    idx = "" if verdict.index is None else f", index {verdict.index}"
    return Outcome(report=rep.to_dict(), summary=f"{verdict.status}{idx}",
                   status=verdict.exit_code, flags=flags)


def _peak_norms(cfg: ExperimentConfig) -> Outcome:
    if cfg.kmax < 10:
        raise UsageError("kmax must be >= 10")
    a = _complex(cfg.point)
    ratios = peak.lemma12_ratio(cfg.beta, cfg.kmax)
    try:
        probe = peak.weak_convergence_probe(cfg.beta, a, cfg.kmax)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    norms = [peak.peak_norm_sq(k, cfg.beta) for k in range(1, cfg.kmax + 1)]
    cmin = min(r for _, r in ratios)
    summary = f"min ratio {cmin:.6g} over k<= {cfg.kmax}; |g_k(a)| at kmax {probe[-1]:.3e}"
    if cfg.output_format == "json":
        report = {"beta": cfg.beta, "kmax": cfg.kmax, "a": _pair(a), "min_ratio": cmin,
                  "rows": [{"k": k, "norm_sq": s, "ratio": r, "g_k_at_a": g}
                           for (k, r), s, g in zip(ratios, norms, probe)]}
        if cfg.kmax >= 100:
            report["growth_exponent"] = peak.observed_growth_exponent(cfg.beta, cfg.kmax)
        return Outcome(report=report, summary=summary)
    rows = [["k", "norm_sq", "ratio", "g_k_at_a"]]
    rows.extend([k, s, r, g] for (k, r), s, g in zip(ratios, norms, probe))
    return Outcome(rows=rows, summary=summary)


COMMANDS: dict[str, Callable[[ExperimentConfig], Outcome]] = {
    "verify-identity": _verify_identity,
    "quotient-check": _quotient_check,
    "space-norm": _space_norm,
    "kernel-eval": _kernel_eval,
    "prop2-check": _prop2_check,
    "op-norm": _op_norm,
    "op-matrix": _op_matrix,
    "adjoint-kernel-check": _adjoint_kernel_check,
    "pseudospectrum": _pseudospectrum,
    "spectrum-image": _spectrum_image,
    "essential": _essential,
    "index": _index,
    "peak-norms": _peak_norms,
}


# -- serialisation --------------------------------------------------------


def report_schema() -> dict:
    """The JSON schema every JSON report validates against."""
    from importlib.resources import files

    return json.loads(files("hslab").joinpath("schemas/report.schema.json").read_text())


def _csv_bytes(rows: list) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow(repr(x) if isinstance(x, float) else x for x in row)
    return buf.getvalue().encode()


def render(cfg: ExperimentConfig, out: Outcome) -> bytes:
    if out.rows is not None:
        if cfg.output_format == "json":
            raise UsageError(f"{cfg.subcommand} with these options only writes CSV")
        return _csv_bytes(out.rows)
    if cfg.output_format == "csv":
        raise UsageError(f"{cfg.subcommand} writes JSON reports")
    body = {"command": cfg.subcommand, "config": cfg.to_dict(), "flags": out.flags, **out.report}
    return (json.dumps(body, sort_keys=True, indent=1, allow_nan=False) + "\n").encode()


def run(cfg: ExperimentConfig, stream=None) -> int:
    """Run one experiment, write its report, print a one-line summary."""
    stream = stream or sys.stdout
    handler = COMMANDS.get(cfg.subcommand)
    if handler is None:
        raise UsageError(f"unknown subcommand {cfg.subcommand!r}")
    start = time.perf_counter()
    out = handler(cfg)
    data = render(cfg, out)
    path = cfg.output_path
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    took = time.perf_counter() - start
    flag_note = f" [flags: {'; '.join(out.flags)}]" if out.flags else ""
    print(f"{cfg.subcommand}: {out.summary}{flag_note} -> {path} ({took:.2f}s)", file=stream)
    return out.status


# -- argument parsing -----------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # distinct exit code for usage errors
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    d = ExperimentConfig()
    parser = _Parser(prog="hslab", description="Hardy-Sobolev space experiments")
    parser.add_argument("--config", help="JSON config file; explicit flags override it")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def common(p, *names, **overrides):
        defaults = {**d.to_dict(), **overrides}
        opts = {
            "phi": dict(help="polynomial symbol in z or z1..zn"),
            "beta": dict(type=float),
            "n": dict(type=int),
            "degree": dict(type=int, help="truncation degree D"),
            "seed": dict(type=int),
            "nmax": dict(type=int),
            "trials": dict(type=int),
            "max_degree": dict(type=int),
            "eps": dict(type=float),
            "grid": dict(type=int, help="points per axis"),
            "half_width": dict(type=float),
            "inner": dict(type=float),
            "outer": dict(type=float),
            "samples": dict(type=int),
            "radii": dict(type=_floats),
            "allow_large": dict(action="store_true"),
            "dump": dict(action="store_true"),
            "lam": dict(flag="--lambda"),
            "r_probe": dict(type=_floats, flag="--r"),
            "delta": dict(type=float),
            "point": dict(help="comma-separated complex coordinates"),
            "w": dict(),
            "tol": dict(type=float),
            "N": dict(type=int),
            "degrees": dict(type=_ints),
            "kmax": dict(type=int),
        }
        for name in names + ("seed", "output", "format"):
            if name in ("output", "format"):
                kw = {"choices": ["csv", "json"]} if name == "format" else {}
                p.add_argument(f"--{name}", default=argparse.SUPPRESS, **kw)
                continue
            spec = dict(opts[name])
            flag = spec.pop("flag", "--" + name.replace("_", "-"))
            if name in overrides:
                spec["help"] = (spec.get("help", "") + f" (default {defaults[name]})").strip()
            p.add_argument(flag, dest=name, default=argparse.SUPPRESS, **spec)
        p.set_defaults(_overrides=overrides)

    common(sub.add_parser("verify-identity"), "nmax", "trials", "max_degree")
    common(sub.add_parser("quotient-check"), "nmax", "trials", "max_degree", nmax=5, trials=100)
    common(sub.add_parser("space-norm"), "phi", "beta", "n", "tol")
    common(sub.add_parser("kernel-eval"), "beta", "n", "point", "w", "tol", point="0.5")
    common(sub.add_parser("prop2-check"), "beta", "n", "N", "degrees", "samples", "tol", samples=100)
    common(sub.add_parser("op-norm"), "phi", "beta", "n", "degree", "tol", "allow_large")
    common(sub.add_parser("op-matrix"), "phi", "beta", "n", "degree", "dump", "allow_large")
    common(sub.add_parser("adjoint-kernel-check"), "phi", "beta", "n", "degree", "samples", "tol",
           "allow_large", degree=80, samples=20)
    common(sub.add_parser("pseudospectrum"), "phi", "beta", "n", "degree", "eps", "grid", "half_width",
           "inner", "outer", "tol", "allow_large", degree=400)
    common(sub.add_parser("spectrum-image"), "phi", "n", "samples")
    common(sub.add_parser("essential"), "phi", "n", "samples", "radii", radii=[0.9, 0.99, 0.999])
    common(sub.add_parser("index"), "phi", "beta", "n", "lam", "r_probe", "delta", "samples",
           samples=20_000)
    common(sub.add_parser("peak-norms"), "beta", "kmax", "point", point="0.9")
    return parser


def config_from_args(argv: list[str] | None = None) -> ExperimentConfig:
    parser = build_parser()
    ns = vars(parser.parse_args(argv))
    overrides = ns.pop("_overrides", {})
    base: dict[str, Any] = {}
    cfg_file = ns.pop("config", None)
    if cfg_file:
        try:
            base = json.loads(Path(cfg_file).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config {cfg_file}: {exc}")
    merged = {**overrides, **base, **ns}
    try:
        return ExperimentConfig.from_dict(merged)
    except (UsageError, TypeError) as exc:
        parser.error(str(exc))
        raise  # unreachable


def main(argv: list[str] | None = None) -> int:
    cfg = config_from_args(argv)
    try:
        return run(cfg)
    except UsageError as exc:
        print(f"hslab {cfg.subcommand}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
