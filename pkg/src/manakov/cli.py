"""Command-line interface: evolve | converge | conserve | bench | selftest.

Every experiment writes its dataset to --out (CSV or JSON) and reports
progress and summary lines on standard error.  Exit codes: 0 success,
1 I/O failure, 2 usage error, 3 configuration error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace

import numpy as np

from . import presets
from ._version import __version__
from .errors import ConfigError, DegenerateFit, NumericalFailure
from .experiments import (
    run_conservation,
    run_evolution,
    run_strong_convergence,
    run_work_precision,
    time_at_error,
    write_conservation_csv,
    write_evolution_csv,
    write_records_csv,
    write_records_json,
)
from .integrators import FixedPointConfig, SchemeId
from .propagator import Backend

_SCHEME_NAMES = tuple(s.value for s in SchemeId)
_BACKEND_NAMES = tuple(b.value for b in Backend)


def _formatter(prog: str) -> argparse.HelpFormatter:
    # fixed width keeps --help output independent of the terminal
    return argparse.HelpFormatter(prog, max_help_position=33, width=96)


def _add_common(sp, preset_names, *, samples: bool, dt_help: str | None):
    sp.add_argument("--preset", choices=sorted(preset_names), default="desk",
                    help="named base configuration (default: desk)")
    sp.add_argument("--a", type=float, metavar="A",
                    help="domain half-width, space interval [-A, A]")
    sp.add_argument("--dx", type=float, metavar="DX", help="mesh size")
    if dt_help is not None:
        sp.add_argument("--dt", type=float, metavar="DT", help=dt_help)
    sp.add_argument("--tfinal", type=float, metavar="T", help="time horizon")
    sp.add_argument("--gamma", type=float, metavar="G",
                    help="noise intensity gamma >= 0")
    sp.add_argument("--scheme", choices=_SCHEME_NAMES, help="time-stepping scheme")
    sp.add_argument("--backend", choices=_BACKEND_NAMES,
                    help="spatial discretization (fd: Dirichlet, spectral: periodic)")
    if samples:
        sp.add_argument("--samples", type=int, metavar="M",
                        help="number of Monte Carlo samples")
    sp.add_argument("--seed", type=int, metavar="S", help="base seed of the noise streams")
    sp.add_argument("--out", required=True, metavar="FILE", help="output dataset path")
    sp.add_argument("--format", choices=("csv", "json"), default="csv",
                    help="output format (default: csv)")
    sp.add_argument("--fp-tol", type=float, metavar="TOL",
                    help="fixed-point residual tolerance, discrete L2 (default 1e-12)")
    sp.add_argument("--fp-maxiter", type=int, metavar="N",
                    help="fixed-point iteration budget (default 50)")
    sp.add_argument("--blowup-threshold", type=float, metavar="B",
                    help="abort when the H1 norm exceeds B (default 1e6)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="manakov",
        description="Simulate a stochastically driven pair of coupled nonlinear "
                    "Schrodinger equations with five time-stepping schemes.",
        formatter_class=_formatter, allow_abbrev=False,
    )
    parser.add_argument("--version", action="version", version=f"manakov {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sp = sub.add_parser(
        "evolve", formatter_class=_formatter, allow_abbrev=False,
        help="run one trajectory and export intensity snapshots",
        description="Run one sample trajectory and export the space-time "
                    "intensities of both components (long-format t,x,i1,i2).",
    )
    _add_common(sp, presets.EVOLVE, samples=False, dt_help="time step size")
    sp.add_argument("--stride", type=int, metavar="K", help="record every K-th step")
    sp.set_defaults(run=_cmd_evolve)

    sp = sub.add_parser(
        "converge", formatter_class=_formatter, allow_abbrev=False,
        help="strong-error study against a coupled fine reference",
        description="Monte Carlo strong-convergence study: each sample couples "
                    "every step size of a dyadic ladder to one fine Brownian "
                    "path; outputs per-h mean squared errors and fits the "
                    "log2 RMS error slope.",
    )
    _add_common(sp, presets.CONVERGE, samples=True,
                dt_help="coarsest ladder step; dyadic fraction dividing --tfinal")
    sp.set_defaults(run=_cmd_converge)

    sp = sub.add_parser(
        "conserve", formatter_class=_formatter, allow_abbrev=False,
        help="track the discrete L2 norm per step for each scheme",
        description="Run every requested scheme over one shared noise path and "
                    "record the discrete L2 norm after every step, plus the "
                    "maximal relative drift per scheme.",
    )
    _add_common(sp, presets.CONSERVE, samples=False, dt_help="time step size")
    sp.set_defaults(run=_cmd_conserve)

    sp = sub.add_parser(
        "bench", formatter_class=_formatter, allow_abbrev=False,
        help="work-precision: wall time vs accuracy per scheme",
        description="Time each scheme over a dyadic step ladder against its own "
                    "fine reference and report wall seconds vs mean final error.",
    )
    _add_common(sp, presets.BENCH, samples=True, dt_help=None)
    sp.set_defaults(run=_cmd_bench)

    sp = sub.add_parser(
        "selftest", formatter_class=_formatter, allow_abbrev=False,
        help="run the built-in verification suites",
        description="Run the unitarity, solver-oracle, path-coupling and "
                    "conservation checks; print one line per suite.",
    )
    sp.add_argument("--seed", type=int, default=20260101, metavar="S",
                    help="seed for the randomized checks (default 20260101)")
    sp.set_defaults(run=_cmd_selftest)
    return parser


def _progress(done: int, total: int) -> None:
    end = "\n" if done == total else "\r"
    print(f"  sample {done}/{total}", end=end, file=sys.stderr, flush=True)


def _maybe_progress():
    return _progress if sys.stderr.isatty() else None


def _fp_override(cfg, args):
    if args.fp_tol is None and args.fp_maxiter is None:
        return cfg
    fp = cfg.fp
    return replace(cfg, fp=FixedPointConfig(
        tol=args.fp_tol if args.fp_tol is not None else fp.tol,
        max_iter=args.fp_maxiter if args.fp_maxiter is not None else fp.max_iter,
    ))


def _apply_overrides(cfg, args, mapping):
    out = {}
    for flag, field_name in mapping.items():
        value = getattr(args, flag, None)
        if value is not None:
            out[field_name] = value
    if getattr(args, "scheme", None) is not None:
        if hasattr(cfg, "scheme"):
            out["scheme"] = SchemeId(args.scheme)
        else:
            out["schemes"] = (SchemeId(args.scheme),)
    if getattr(args, "backend", None) is not None:
        out["backend"] = Backend(args.backend)
    cfg = replace(cfg, **out)
    return _fp_override(cfg, args)


_BASE_MAPPING = {
    "a": "a", "dx": "dx", "tfinal": "tfinal", "gamma": "gamma",
    "seed": "base_seed", "blowup_threshold": "blowup_threshold",
}


def _shift_ladder(cfg, dt: float):
    """Move the dyadic step ladder so its coarsest step equals dt."""
    n0 = cfg.tfinal / dt
    if n0 < 1 or abs(n0 - round(n0)) > 1e-9 * max(1.0, n0):
        raise ConfigError(f"step {dt} does not divide horizon {cfg.tfinal}")
    k = round(-math.log2(dt))
    if not math.isclose(2.0**-k, dt, rel_tol=1e-12):
        raise ConfigError(f"coarsest ladder step must be a power of two, got {dt}")
    span = max(cfg.coarse_exponents) - min(cfg.coarse_exponents)
    gap = cfg.ref_exponent - max(cfg.coarse_exponents)
    return replace(cfg, coarse_exponents=tuple(range(k, k + span + 1)),
                   ref_exponent=k + span + gap)


def _cmd_evolve(args) -> int:
    cfg = presets.EVOLVE[args.preset]
    cfg = _apply_overrides(cfg, args, {**_BASE_MAPPING, "dt": "h", "stride": "stride"})
    result = run_evolution(cfg)
    if args.format == "csv":
        write_evolution_csv(result, args.out)
    else:
        import json
        payload = {
            "t": result.times.tolist(), "x": result.x.tolist(),
            "i1": result.intensity1.tolist(), "i2": result.intensity2.tolist(),
        }
        with open(args.out, "w", encoding="ascii") as f:
            json.dump(payload, f)
            f.write("\n")
    drift = float(np.abs(result.l2_series - result.l2_series[0]).max()
                  / result.l2_series[0])
    print(f"evolve: {len(result.times)} snapshots -> {args.out} "
          f"(L2 drift {drift:.3e})", file=sys.stderr)
    return 0


def _cmd_converge(args) -> int:
    cfg = presets.CONVERGE[args.preset]
    cfg = _apply_overrides(cfg, args, {**_BASE_MAPPING, "samples": "samples"})
    if args.dt is not None:
        cfg = _shift_ladder(cfg, args.dt)
    result = run_strong_convergence(cfg, progress=_maybe_progress())
    _write_records(result.records, args)
    fit = result.slope_h1_final
    print(f"converge: slope(H1 final) = {fit.slope:.4f} +- {fit.stderr:.4f}, "
          f"slope(H1 sup) = {result.slope_h1_sup.slope:.4f}, "
          f"slope(L2 final) = {result.slope_l2_final.slope:.4f}, "
          f"aborted {len(result.aborted)}/{cfg.samples} -> {args.out}",
          file=sys.stderr)
    return 0


def _cmd_conserve(args) -> int:
    cfg = presets.CONSERVE[args.preset]
    cfg = _apply_overrides(cfg, args, {**_BASE_MAPPING, "dt": "h"})
    result = run_conservation(cfg, progress=_maybe_progress())
    if args.format == "csv":
        write_conservation_csv(result, args.out)
    else:
        import json
        payload = {
            "t": result.times.tolist(),
            "l2": {s.value: result.series[s].tolist() for s in cfg.schemes},
            "drift": {s.value: result.drift[s] for s in cfg.schemes},
        }
        with open(args.out, "w", encoding="ascii") as f:
            json.dump(payload, f)
            f.write("\n")
    for scheme in cfg.schemes:
        print(f"conserve: {scheme.value:7s} max relative L2 drift "
              f"{result.drift[scheme]:.3e}", file=sys.stderr)
    return 0


def _cmd_bench(args) -> int:
    cfg = presets.BENCH[args.preset]
    cfg = _apply_overrides(cfg, args, {**_BASE_MAPPING, "samples": "samples"})
    result = run_work_precision(cfg, progress=_maybe_progress())
    _write_records(result.records, args)
    for scheme, curve in result.curves.items():
        pts = ", ".join(f"(err {e:.3e}, {t:.2f}s)" for e, t in curve)
        print(f"bench: {scheme.value:7s} {pts}", file=sys.stderr)
    comparison = compare_matched_error(result, SchemeId.CN, SchemeId.SEXP)
    if comparison is not None:
        level, t_cn, t_sexp = comparison
        print(f"bench: at matched error {level:.3e}: cn {t_cn:.2f}s vs "
              f"sexp {t_sexp:.2f}s", file=sys.stderr)
    return 0


def compare_matched_error(result, scheme_a: SchemeId, scheme_b: SchemeId):
    """Wall seconds of both schemes at one error level inside both curves.

    Returns (error_level, seconds_a, seconds_b), or None when the curves do
    not overlap or either scheme is missing.
    """
    curve_a = result.curves.get(scheme_a)
    curve_b = result.curves.get(scheme_b)
    if not curve_a or not curve_b or len(curve_a) < 2 or len(curve_b) < 2:
        return None
    low = max(min(e for e, _ in curve_a), min(e for e, _ in curve_b))
    high = min(max(e for e, _ in curve_a), max(e for e, _ in curve_b))
    if not low < high:
        return None
    level = math.sqrt(low * high)       # geometric midpoint of the overlap
    try:
        return level, time_at_error(curve_a, level), time_at_error(curve_b, level)
    except (ConfigError, DegenerateFit):
        return None


def _write_records(records, args) -> None:
    if args.format == "csv":
        write_records_csv(records, args.out)
    else:
        write_records_json(records, args.out)


def _cmd_selftest(args) -> int:
    from .selftest import run_selftest

    report = run_selftest(base_seed=args.seed)
    for line in report.lines:
        print(line)
    print(f"selftest: {report.passed}/{report.total} suites passed")
    if report.passed != report.total:
        raise NumericalFailure("selftest failed")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except OSError as err:
        print(f"error: io: {err}", file=sys.stderr)
        return 1
    except ConfigError as err:
        print(f"error: config: {err}", file=sys.stderr)
        return 3
    except NumericalFailure as err:
        print(f"error: numerical: {err}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
