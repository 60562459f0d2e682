"""Track the discrete L2 norm of every scheme along one shared noise path.

Usage: python scripts/run_conservation.py [--preset desk] [--out FILE]
"""
import argparse

from manakov import presets
from manakov.experiments import run_conservation, write_conservation_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--preset", choices=sorted(presets.CONSERVE), default="desk")
    ap.add_argument("--out", default="conservation.csv")
    args = ap.parse_args()

    result = run_conservation(presets.CONSERVE[args.preset])
    write_conservation_csv(result, args.out)
    for scheme, drift in result.drift.items():
        print(f"{scheme.value:7s} max relative L2 drift {drift:.3e}")
    print(f"series -> {args.out}")


if __name__ == "__main__":
    main()
