"""Mesh-ratio curves rho(P_n) for n = 3..210 on the equilateral and skinny triangles.

Writes one CSV (plus manifest) per (triangle, generator) into --out-dir.
Random generators are averaged over --trials runs.
"""
import argparse
import os
import time

from quasitri import cli
from quasitri.generators import GENERATORS


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results/mesh")
    ap.add_argument("--n-max", type=int, default=210)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--triangles", default="equilateral,skinny")
    ap.add_argument("--generators", default=",".join(GENERATORS))
    args = ap.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)
    for tri in args.triangles.split(","):
        for gen in args.generators.split(","):
            out = os.path.join(args.out_dir, f"{tri}_{gen}.csv")
            t0 = time.time()
            code = cli.main(["mesh-sweep", "--gen", gen, "--triangle", tri, "--n-max", str(args.n_max),
                             "--trials", str(args.trials), "--out", out])
            print(f"{out}: exit {code} in {time.time() - t0:.1f}s")


if __name__ == "__main__":
    main()
