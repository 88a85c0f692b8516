"""Quotients n log 2 / -log(c_1...c_n) of the blockwise 1/3, 1/4 model at every block end."""

import argparse
import math

from cantorlab.dimensions import quotient_sequence
from cantorlab.models import box_nonexist_sequence


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=100_000)
    args = ap.parse_args()

    m = box_nonexist_sequence()
    q = quotient_sequence(m, args.n_max)
    print(f"reference values: log2/log4 = 0.5, log2/log3 = {math.log(2) / math.log(3):.6f}")
    print(f"{'block':>5} {'end n':>8} {'c in block':>10} {'q_n':>10}")
    for k, n in enumerate((e for e in m.c.block_ends(args.n_max) if e <= args.n_max), start=1):
        print(f"{k:>5} {n:>8} {str(m.c_at(n)):>10} {q[n]:10.6f}")


if __name__ == "__main__":
    main()
