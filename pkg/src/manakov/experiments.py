"""Reproducible experiment drivers and their machine-readable outputs.

Four studies: space-time evolution export, strong convergence against a
coupled fine reference, work-precision (wall time vs accuracy), and per-step
L2 conservation tracking.  Every study is a pure function of its config;
reruns produce identical CSV bytes apart from the timing column.

Aggregation runs in ascending sample-index order so results do not depend
on scheduling; per-sample work only touches that sample's generator stream.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from ._version import __version__
from .errors import ConfigError, DegenerateFit, NumericalFailure
from .integrators import (
    CUBIC,
    FixedPointConfig,
    Nonlinearity,
    SchemeId,
    run_trajectory,
)
from .model import Boundary, FieldState, make_grid, soliton_initial_condition
from .noise import NoiseConfig, coarsen, sample_path
from .observables import error_vs_reference
from .propagator import Backend

CSV_COLUMNS = (
    "scheme", "h", "dx", "gamma", "samples",
    "err_l2_final", "err_h1_final", "err_h1_sup",
    "wall_seconds", "seed", "version",
)
TIMING_COLUMNS = ("wall_seconds",)

_INT_COLUMNS = ("samples", "seed")
_FLOAT_COLUMNS = ("h", "dx", "gamma", "err_l2_final", "err_h1_final",
                  "err_h1_sup", "wall_seconds")


@dataclass(frozen=True)
class ResultRecord:
    """One (scheme, h) aggregate; the err_* fields are mean squared errors."""

    scheme: str
    h: float
    dx: float
    gamma: float
    samples: int
    err_l2_final: float
    err_h1_final: float
    err_h1_sup: float
    wall_seconds: float
    seed: int
    version: str


def _format_value(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def records_to_csv(records) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for r in records:
        lines.append(",".join(_format_value(getattr(r, c)) for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def write_records_csv(records, filename) -> None:
    with open(filename, "w", encoding="ascii") as f:
        f.write(records_to_csv(records))


def read_records_csv(filename) -> list[ResultRecord]:
    with open(filename, "r", encoding="ascii") as f:
        header = f.readline().strip().split(",")
        if tuple(header) != CSV_COLUMNS:
            raise ConfigError(f"unexpected CSV header {header}")
        records = []
        for line in f:
            if not line.strip():
                continue
            raw = dict(zip(CSV_COLUMNS, line.strip().split(",")))
            for c in _INT_COLUMNS:
                raw[c] = int(raw[c])
            for c in _FLOAT_COLUMNS:
                raw[c] = float(raw[c])
            records.append(ResultRecord(**raw))
    return records


def write_records_json(records, filename) -> None:
    payload = [{c: getattr(r, c) for c in CSV_COLUMNS} for r in records]
    with open(filename, "w", encoding="ascii") as f:
        json.dump(payload, f, indent=1)
        f.write("\n")


def strip_timing_columns(csv_text: str) -> str:
    """Remove the wall-clock columns; what remains is run-to-run identical."""
    lines = csv_text.splitlines()
    header = lines[0].split(",")
    keep = [i for i, name in enumerate(header) if name not in TIMING_COLUMNS]
    out = [",".join([line.split(",")[i] for i in keep]) for line in lines]
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    stderr: float
    exact: bool = False     # two points: interpolation, stderr not defined


def fit_slope(points) -> FitResult:
    """Ordinary least squares through (x, y) pairs, with slope stderr."""
    pts = [(float(x), float(y)) for x, y in points]
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if len(xs) < 2 or np.unique(xs).size < 2:
        raise DegenerateFit(f"need >= 2 distinct abscissae, got {xs!r}")
    xbar, ybar = float(xs.mean()), float(ys.mean())
    sxx = float(((xs - xbar) ** 2).sum())
    sxy = float(((xs - xbar) * (ys - ybar)).sum())
    slope = sxy / sxx
    intercept = ybar - slope * xbar
    n = len(xs)
    if n == 2:
        return FitResult(slope=slope, intercept=intercept, stderr=0.0, exact=True)
    ssr = float(((ys - intercept - slope * xs) ** 2).sum())
    stderr = math.sqrt(ssr / (n - 2) / sxx)
    return FitResult(slope=slope, intercept=intercept, stderr=stderr)


def _boundary_for(backend: Backend) -> Boundary:
    return Boundary.DIRICHLET if backend is Backend.FD else Boundary.PERIODIC


def _dyadic_steps(tfinal: float, exponent: int) -> int:
    n = round(tfinal * 2**exponent)
    if n < 1 or abs(n - tfinal * 2**exponent) > 1e-9:
        raise ConfigError(
            f"horizon {tfinal} is not a multiple of the step 2^-{exponent}"
        )
    return n


@dataclass(frozen=True)
class ConvergenceStudyConfig:
    """Strong-error study: many h against one coupled fine reference."""

    a: float = 20.0
    dx: float = 0.4
    tfinal: float = 0.5
    gamma: float = 1.0
    coarse_exponents: tuple[int, ...] = (6, 7, 8, 9, 10)
    ref_exponent: int = 13
    samples: int = 50
    scheme: SchemeId = SchemeId.SEXP
    base_seed: int = 20260101
    backend: Backend = Backend.FD
    fp: FixedPointConfig = field(default_factory=FixedPointConfig)
    nonlinearity: Nonlinearity = CUBIC
    blowup_threshold: float = 1e6

    def __post_init__(self):
        if not self.coarse_exponents:
            raise ConfigError("need at least one coarse step exponent")
        if self.ref_exponent <= max(self.coarse_exponents):
            raise ConfigError(
                f"reference exponent {self.ref_exponent} must exceed the "
                f"coarse exponents {self.coarse_exponents}"
            )
        if self.samples < 1:
            raise ConfigError(f"need samples >= 1, got {self.samples}")
        for k in (*self.coarse_exponents, self.ref_exponent):
            _dyadic_steps(self.tfinal, k)


@dataclass(frozen=True)
class StrongConvergenceResult:
    config: ConvergenceStudyConfig
    records: tuple[ResultRecord, ...]       # one per coarse h, h descending
    slope_h1_final: FitResult
    slope_h1_sup: FitResult
    slope_l2_final: FitResult
    aborted: tuple[tuple[int, str], ...]    # (sample_index, error class)


def _reference_snapshot_times(tfinal: float, finest_coarse_n: int) -> np.ndarray:
    h = tfinal / finest_coarse_n
    return np.arange(finest_coarse_n + 1) * h


def run_strong_convergence(cfg: ConvergenceStudyConfig, progress=None) -> StrongConvergenceResult:
    """Coupled-path strong error per h, RMS over samples, fitted slopes.

    The reference trajectory is always the explicit exponential scheme at
    h = 2^-ref_exponent on the same fine path each coarse run consumes.
    Samples hitting BlowUp/NoConvergence are recorded and excluded; more
    than 5% aborts fails the study.
    """
    exponents = tuple(sorted(cfg.coarse_exponents))
    grid = make_grid(cfg.a, cfg.dx, _boundary_for(cfg.backend))
    x0 = soliton_initial_condition(grid)
    n_ref = _dyadic_steps(cfg.tfinal, cfg.ref_exponent)
    h_ref = cfg.tfinal / n_ref
    n_finest = _dyadic_steps(cfg.tfinal, max(exponents))
    ref_times = _reference_snapshot_times(cfg.tfinal, n_finest)

    sums = {k: np.zeros(3) for k in exponents}    # sq l2_final, h1_final, h1_sup
    walls = {k: 0.0 for k in exponents}
    n_ok = 0
    aborted: list[tuple[int, str]] = []
    common = dict(
        gamma=cfg.gamma, backend=cfg.backend, fp=cfg.fp,
        nonlinearity=cfg.nonlinearity, blowup_threshold=cfg.blowup_threshold,
    )
    for s in range(cfg.samples):
        path = sample_path(NoiseConfig(cfg.base_seed, s), n_ref, h_ref)
        try:
            reference = run_trajectory(
                x0, path, SchemeId.SEXP, snapshot_times=ref_times, **common
            )
            sample_sums = {}
            sample_walls = {}
            for k in exponents:
                n_k = _dyadic_steps(cfg.tfinal, k)
                coarse_path = coarsen(path, n_ref // n_k)
                snap = np.arange(n_k + 1) * (cfg.tfinal / n_k)
                begin = time.perf_counter()
                traj = run_trajectory(
                    x0, coarse_path, cfg.scheme, snapshot_times=snap, **common
                )
                sample_walls[k] = time.perf_counter() - begin
                report = error_vs_reference(traj, reference)
                sample_sums[k] = np.array(
                    [report.l2_final**2, report.h1_final**2, report.h1_sup**2]
                )
        except NumericalFailure as failure:
            aborted.append((s, type(failure).__name__))
            continue
        for k in exponents:
            sums[k] += sample_sums[k]
            walls[k] += sample_walls[k]
        n_ok += 1
        if progress is not None:
            progress(s + 1, cfg.samples)
    if n_ok == 0 or len(aborted) > 0.05 * cfg.samples:
        raise NumericalFailure(
            f"{len(aborted)} of {cfg.samples} samples aborted: {aborted}"
        )

    records = []
    pts_l2, pts_h1, pts_sup = [], [], []
    for k in exponents:
        h_k = cfg.tfinal / _dyadic_steps(cfg.tfinal, k)
        mse = sums[k] / n_ok
        records.append(ResultRecord(
            scheme=cfg.scheme.value, h=h_k, dx=cfg.dx, gamma=cfg.gamma,
            samples=n_ok, err_l2_final=mse[0], err_h1_final=mse[1],
            err_h1_sup=mse[2], wall_seconds=walls[k], seed=cfg.base_seed,
            version=__version__,
        ))
        if (mse <= 0).any():
            raise DegenerateFit(f"zero error at h={h_k}; cannot fit a log slope")
        log_h = math.log2(h_k)
        pts_l2.append((log_h, 0.5 * math.log2(mse[0])))
        pts_h1.append((log_h, 0.5 * math.log2(mse[1])))
        pts_sup.append((log_h, 0.5 * math.log2(mse[2])))
    return StrongConvergenceResult(
        config=cfg,
        records=tuple(records),
        slope_h1_final=fit_slope(pts_h1),
        slope_h1_sup=fit_slope(pts_sup),
        slope_l2_final=fit_slope(pts_l2),
        aborted=tuple(aborted),
    )


@dataclass(frozen=True)
class WorkPrecisionConfig:
    """Wall time vs final error across schemes on shared step ladders."""

    a: float = 20.0
    dx: float = 0.4
    tfinal: float = 0.5
    gamma: float = 1.0
    schemes: tuple[SchemeId, ...] = (SchemeId.SEXP, SchemeId.CN)
    coarse_exponents: tuple[int, ...] = (5, 6, 7, 8)
    ref_exponent: int = 11
    samples: int = 8
    base_seed: int = 20260101
    backend: Backend = Backend.FD
    fp: FixedPointConfig = field(default_factory=FixedPointConfig)
    nonlinearity: Nonlinearity = CUBIC
    blowup_threshold: float = 1e6

    def __post_init__(self):
        if len(self.schemes) < 1 or len(self.coarse_exponents) < 2:
            raise ConfigError("need >= 1 scheme and >= 2 step sizes")
        if self.ref_exponent <= max(self.coarse_exponents):
            raise ConfigError("reference exponent must exceed coarse exponents")
        for k in (*self.coarse_exponents, self.ref_exponent):
            _dyadic_steps(self.tfinal, k)


@dataclass(frozen=True)
class WorkPrecisionResult:
    config: WorkPrecisionConfig
    records: tuple[ResultRecord, ...]
    # per scheme: (rms final L2 error, summed wall seconds), h descending,
    # thinned to strictly decreasing error
    curves: dict
    aborted: tuple[tuple[str, int, str], ...]   # (scheme, sample, error class)


def _clean_curve(points) -> list[tuple[float, float]]:
    cleaned = []
    best = math.inf
    for err, seconds in points:
        if err < best:
            cleaned.append((err, seconds))
            best = err
    return cleaned


def time_at_error(curve, err: float) -> float:
    """Log-log interpolation of wall time at a given error level."""
    if len(curve) < 2:
        raise DegenerateFit("need >= 2 curve points to interpolate")
    errs = np.log([p[0] for p in curve][::-1])      # ascending
    secs = np.log([p[1] for p in curve][::-1])
    if not (errs[0] <= math.log(err) <= errs[-1]):
        raise ConfigError(f"error level {err} outside curve range")
    return float(math.exp(np.interp(math.log(err), errs, secs)))


def run_work_precision(cfg: WorkPrecisionConfig, progress=None) -> WorkPrecisionResult:
    """Per (scheme, h): summed stepping wall time and mean squared errors.

    Each scheme is its own reference (same sample, same scheme, at
    h = 2^-ref_exponent), so curves measure self-convergence cost.
    """
    exponents = tuple(sorted(cfg.coarse_exponents))
    grid = make_grid(cfg.a, cfg.dx, _boundary_for(cfg.backend))
    x0 = soliton_initial_condition(grid)
    n_ref = _dyadic_steps(cfg.tfinal, cfg.ref_exponent)
    h_ref = cfg.tfinal / n_ref
    n_finest = _dyadic_steps(cfg.tfinal, max(exponents))
    ref_times = _reference_snapshot_times(cfg.tfinal, n_finest)
    common = dict(
        gamma=cfg.gamma, backend=cfg.backend, fp=cfg.fp,
        nonlinearity=cfg.nonlinearity, blowup_threshold=cfg.blowup_threshold,
    )

    records = []
    curves = {}
    aborted: list[tuple[str, int, str]] = []
    done = 0
    total = len(cfg.schemes) * cfg.samples
    for scheme in cfg.schemes:
        sums = {k: np.zeros(3) for k in exponents}
        walls = {k: 0.0 for k in exponents}
        n_ok = 0
        for s in range(cfg.samples):
            path = sample_path(NoiseConfig(cfg.base_seed, s), n_ref, h_ref)
            try:
                reference = run_trajectory(
                    x0, path, scheme, snapshot_times=ref_times, **common
                )
                sample_sums = {}
                sample_walls = {}
                for k in exponents:
                    n_k = _dyadic_steps(cfg.tfinal, k)
                    coarse_path = coarsen(path, n_ref // n_k)
                    snap = np.arange(n_k + 1) * (cfg.tfinal / n_k)
                    begin = time.perf_counter()
                    traj = run_trajectory(
                        x0, coarse_path, scheme, snapshot_times=snap, **common
                    )
                    sample_walls[k] = time.perf_counter() - begin
                    report = error_vs_reference(traj, reference)
                    sample_sums[k] = np.array(
                        [report.l2_final**2, report.h1_final**2, report.h1_sup**2]
                    )
            except NumericalFailure as failure:
                aborted.append((scheme.value, s, type(failure).__name__))
                continue
            for k in exponents:
                sums[k] += sample_sums[k]
                walls[k] += sample_walls[k]
            n_ok += 1
            done += 1
            if progress is not None:
                progress(done, total)
        if n_ok == 0:
            raise NumericalFailure(f"all samples aborted for scheme {scheme.value}")
        points = []
        for k in exponents:                 # ascending k = descending h
            h_k = cfg.tfinal / _dyadic_steps(cfg.tfinal, k)
            mse = sums[k] / n_ok
            records.append(ResultRecord(
                scheme=scheme.value, h=h_k, dx=cfg.dx, gamma=cfg.gamma,
                samples=n_ok, err_l2_final=mse[0], err_h1_final=mse[1],
                err_h1_sup=mse[2], wall_seconds=walls[k], seed=cfg.base_seed,
                version=__version__,
            ))
            points.append((math.sqrt(mse[0]), walls[k]))
        curves[scheme] = _clean_curve(points)
    if len(aborted) > 0.05 * total:
        raise NumericalFailure(f"{len(aborted)} of {total} runs aborted: {aborted}")
    return WorkPrecisionResult(
        config=cfg, records=tuple(records), curves=curves, aborted=tuple(aborted)
    )


@dataclass(frozen=True)
class ConservationConfig:
    """Track the discrete L2 norm per step for several schemes, one path."""

    a: float = 50.0
    dx: float = 0.25
    tfinal: float = 3.0
    h: float = 0.006
    gamma: float = 1.0
    schemes: tuple[SchemeId, ...] = tuple(SchemeId)
    base_seed: int = 20260101
    sample_index: int = 0
    backend: Backend = Backend.FD
    fp: FixedPointConfig = field(default_factory=FixedPointConfig)
    nonlinearity: Nonlinearity = CUBIC
    blowup_threshold: float = 1e6

    def n_steps(self) -> int:
        n = round(self.tfinal / self.h)
        if n < 1 or abs(n * self.h - self.tfinal) > 1e-9 * max(1.0, self.tfinal):
            raise ConfigError(f"step {self.h} does not divide horizon {self.tfinal}")
        return n

    def __post_init__(self):
        self.n_steps()


@dataclass(frozen=True)
class ConservationResult:
    config: ConservationConfig
    times: np.ndarray           # (n_steps + 1,)
    series: dict                # SchemeId -> (n_steps + 1,) L2 norms
    drift: dict                 # SchemeId -> max |l2_n - l2_0| / l2_0


def run_conservation(cfg: ConservationConfig, progress=None) -> ConservationResult:
    n = cfg.n_steps()
    grid = make_grid(cfg.a, cfg.dx, _boundary_for(cfg.backend))
    x0 = soliton_initial_condition(grid)
    path = sample_path(NoiseConfig(cfg.base_seed, cfg.sample_index), n, cfg.tfinal / n)
    series = {}
    drift = {}
    for i, scheme in enumerate(cfg.schemes):
        traj = run_trajectory(
            x0, path, scheme, gamma=cfg.gamma, backend=cfg.backend, fp=cfg.fp,
            nonlinearity=cfg.nonlinearity, blowup_threshold=cfg.blowup_threshold,
            record_l2=True,
        )
        series[scheme] = traj.l2_series
        drift[scheme] = float(np.abs(traj.l2_series - traj.l2_series[0]).max()
                              / traj.l2_series[0])
        if progress is not None:
            progress(i + 1, len(cfg.schemes))
    times = np.arange(n + 1) * (cfg.tfinal / n)
    return ConservationResult(config=cfg, times=times, series=series, drift=drift)


def write_conservation_csv(result: ConservationResult, filename) -> None:
    """Long format: scheme, step, t, l2 — one row per scheme per step."""
    with open(filename, "w", encoding="ascii") as f:
        f.write("scheme,step,t,l2\n")
        for scheme in result.config.schemes:
            l2 = result.series[scheme]
            for step, (t, v) in enumerate(zip(result.times, l2)):
                f.write(f"{scheme.value},{step},{t:.17g},{v:.17g}\n")


@dataclass(frozen=True)
class EvolutionConfig:
    """One trajectory exported as a space-time intensity dataset."""

    a: float = 20.0
    dx: float = 0.4
    tfinal: float = 1.0
    h: float = 0.004
    gamma: float = 1.0
    scheme: SchemeId = SchemeId.SEXP
    base_seed: int = 20260101
    sample_index: int = 0
    stride: int = 10            # record every stride-th step
    backend: Backend = Backend.FD
    fp: FixedPointConfig = field(default_factory=FixedPointConfig)
    nonlinearity: Nonlinearity = CUBIC
    blowup_threshold: float = 1e6
    initial: FieldState | None = None    # defaults to the soliton

    def n_steps(self) -> int:
        n = round(self.tfinal / self.h)
        if n < 1 or abs(n * self.h - self.tfinal) > 1e-9 * max(1.0, self.tfinal):
            raise ConfigError(f"step {self.h} does not divide horizon {self.tfinal}")
        return n

    def __post_init__(self):
        self.n_steps()
        if self.stride < 1:
            raise ConfigError(f"stride must be >= 1, got {self.stride}")


@dataclass(frozen=True)
class EvolutionResult:
    config: EvolutionConfig
    x: np.ndarray               # (m,)
    times: np.ndarray           # (k,)
    intensity1: np.ndarray      # (k, m)
    intensity2: np.ndarray      # (k, m)
    l2_series: np.ndarray       # (n_steps + 1,)


def run_evolution(cfg: EvolutionConfig) -> EvolutionResult:
    n = cfg.n_steps()
    grid = make_grid(cfg.a, cfg.dx, _boundary_for(cfg.backend))
    x0 = cfg.initial if cfg.initial is not None else soliton_initial_condition(grid)
    path = sample_path(NoiseConfig(cfg.base_seed, cfg.sample_index), n, cfg.tfinal / n)
    steps = sorted(set(range(0, n + 1, cfg.stride)) | {n})
    snap = np.array(steps) * (cfg.tfinal / n)
    traj = run_trajectory(
        x0, path, cfg.scheme, gamma=cfg.gamma, backend=cfg.backend, fp=cfg.fp,
        nonlinearity=cfg.nonlinearity, blowup_threshold=cfg.blowup_threshold,
        snapshot_times=snap, record_l2=True,
    )
    mag = traj.states.real**2 + traj.states.imag**2
    return EvolutionResult(
        config=cfg, x=grid.nodes, times=traj.times,
        intensity1=mag[:, :, 0], intensity2=mag[:, :, 1],
        l2_series=traj.l2_series,
    )


def write_evolution_csv(result: EvolutionResult, filename) -> None:
    """Long format: t, x, i1, i2 — one row per (time, node)."""
    with open(filename, "w", encoding="ascii") as f:
        f.write("t,x,i1,i2\n")
        for k, t in enumerate(result.times):
            for j, x in enumerate(result.x):
                f.write(f"{t:.17g},{x:.17g},"
                        f"{result.intensity1[k, j]:.17g},"
                        f"{result.intensity2[k, j]:.17g}\n")
