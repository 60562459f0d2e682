"""Work-precision benchmark: wall seconds vs accuracy for each scheme.

Usage: python scripts/run_benchmark.py [--preset desk] [--samples M] [--out FILE]
"""
import argparse
import sys
from dataclasses import replace

from manakov import presets
from manakov.cli import compare_matched_error
from manakov.experiments import run_work_precision, write_records_csv
from manakov.integrators import SchemeId


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--preset", choices=sorted(presets.BENCH), default="desk")
    ap.add_argument("--samples", type=int, help="override the sample count")
    ap.add_argument("--out", default="work_precision.csv")
    args = ap.parse_args()

    cfg = presets.BENCH[args.preset]
    if args.samples is not None:
        cfg = replace(cfg, samples=args.samples)

    def progress(done, total):
        print(f"  run {done}/{total}", end="\r", file=sys.stderr, flush=True)

    result = run_work_precision(cfg, progress=progress)
    print(file=sys.stderr)
    write_records_csv(result.records, args.out)
    for scheme, curve in result.curves.items():
        pts = ", ".join(f"(err {e:.3e}, {t:.2f}s)" for e, t in curve)
        print(f"{scheme.value:7s} {pts}")
    comparison = compare_matched_error(result, SchemeId.CN, SchemeId.SEXP)
    if comparison is not None:
        level, t_cn, t_sexp = comparison
        print(f"at matched error {level:.3e}: cn {t_cn:.2f}s vs sexp {t_sexp:.2f}s")
    print(f"records -> {args.out}")


if __name__ == "__main__":
    main()
