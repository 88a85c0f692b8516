"""Covering slopes log2 #cover(2^-K) / K over a range of K, printed as CSV.

Example: python3 scripts/slope_sweep.py --model star --block-interior
"""

import argparse
import csv
import sys

from cantorlab.cli import load_model
from cantorlab.dimensions import block_interior_scales, covering_slope


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", default="mcmullen", help="preset name or JSON file")
    ap.add_argument("--k-min", type=int, default=100)
    ap.add_argument("--k-max", type=int, default=2000)
    ap.add_argument("--k-step", type=int, default=100)
    ap.add_argument("--block-interior", action="store_true")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    model, _ = load_model(args.model)
    if args.block_interior:
        scales = block_interior_scales(model)
    else:
        scales = [(K, None) for K in range(args.k_min, args.k_max + 1, args.k_step)]
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["K", "block", "slope"])
    for K, block in scales:
        out.writerow([K, block if block is not None else "", repr(covering_slope(model, K, args.threads))])


if __name__ == "__main__":
    main()
