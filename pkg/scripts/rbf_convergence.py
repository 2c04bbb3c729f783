"""E2 convergence for the six (test function, kernel) pairs on the equilateral triangle."""
import argparse
import os
import time

from quasitri import cli
from quasitri.rbf import EXPERIMENT_C

N_LIST = "45,55,66,78,91,105,120,136,153,171,190,210"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results/rbf")
    ap.add_argument("--n-list", default=N_LIST)
    ap.add_argument("--seeds", type=int, default=20)
    args = ap.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)
    for (func, kernel), c in EXPERIMENT_C.items():
        out = os.path.join(args.out_dir, f"{func}_{kernel}.csv")
        t0 = time.time()
        code = cli.main(["rbf", "--test-function", func, "--kernel", kernel, "--c", str(c),
                         "--n-list", args.n_list, "--seeds", str(args.seeds), "--out", out])
        print(f"{out}: exit {code} in {time.time() - t0:.1f}s")


if __name__ == "__main__":
    main()
