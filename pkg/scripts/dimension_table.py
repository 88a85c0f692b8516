"""Print the five dimension values of the oscillating-base model for several M."""

import argparse
from fractions import Fraction

from cantorlab.dimensions import star_dimensions
from cantorlab.models import BaseSequence, StarModel


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--beta", default="1/2")
    ap.add_argument("--M", type=int, nargs="+", default=[100, 128, 256, 1024])
    args = ap.parse_args()

    keys = ("ldim", "hdim", "lbdim", "ubdim", "adim")
    print(f"{'M':>6} " + " ".join(f"{k:>12}" for k in keys) + f" {'min gap':>10}")
    for M in args.M:
        rep = star_dimensions(StarModel(Fraction(args.beta), BaseSequence(M)))
        vals = dict(rep.values())
        gap = min(g for _, _, g in rep.gaps())
        print(f"{M:>6} " + " ".join(f"{vals[k].value:12.9f}" for k in keys) + f" {gap:10.3e}")


if __name__ == "__main__":
    main()
