"""Strong-convergence study; fits the RMS error slope against the step size.

Usage: python scripts/run_convergence.py [--preset desk] [--samples M] [--out FILE]
The desk preset takes about a minute at the default sample count.
"""
import argparse
import sys
from dataclasses import replace

from manakov import presets
from manakov.experiments import run_strong_convergence, write_records_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--preset", choices=sorted(presets.CONVERGE), default="desk")
    ap.add_argument("--samples", type=int, help="override the sample count")
    ap.add_argument("--out", default="strong_convergence.csv")
    args = ap.parse_args()

    cfg = presets.CONVERGE[args.preset]
    if args.samples is not None:
        cfg = replace(cfg, samples=args.samples)

    def progress(done, total):
        print(f"  sample {done}/{total}", end="\r", file=sys.stderr, flush=True)

    result = run_strong_convergence(cfg, progress=progress)
    print(file=sys.stderr)
    write_records_csv(result.records, args.out)
    for r in result.records:
        print(f"h = {r.h:<10.6g} rms H1 final error = {r.err_h1_final**0.5:.6e} "
              f"({r.wall_seconds:.2f}s stepping)")
    print(f"slope (H1 final) = {result.slope_h1_final.slope:.4f} "
          f"+- {result.slope_h1_final.stderr:.4f}")
    print(f"slope (H1 sup)   = {result.slope_h1_sup.slope:.4f}")
    print(f"slope (L2 final) = {result.slope_l2_final.slope:.4f}")
    print(f"records -> {args.out}")


if __name__ == "__main__":
    main()
