"""Angle sweep: J, vertex mesh ratio, K bounds and empirical K per triangle."""
import argparse
import os

from quasitri import cli


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/shape_sweep.csv")
    ap.add_argument("--steps", type=int, default=15)
    ap.add_argument("--min-j", type=float, default=0.02)
    ap.add_argument("--n", type=int, default=2000, help="VG cap per triangle")
    args = ap.parse_args()
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    raise SystemExit(cli.main(["shape-sweep", "--alpha-steps", str(args.steps), "--beta-steps", str(args.steps),
                               "--min-j", str(args.min_j), "--n", str(args.n), "--out", args.out]))


if __name__ == "__main__":
    main()
