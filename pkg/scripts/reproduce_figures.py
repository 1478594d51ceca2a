#!/usr/bin/env python3
"""Certificate curves against delta: epsilon, delta_hat, r, mu and the minimum
SNR, as one CSV that any plotting tool can render."""

import argparse

from wflift.certificates import CURVE_HEADER, curve, delta_star
from wflift.io import write_csv


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="curves.csv")
    ap.add_argument("--points", type=int, default=500)
    ap.add_argument("--full-range", action="store_true",
                    help="extend the grid to delta = 0.49, past the certified boundary")
    args = ap.parse_args()

    stop = 0.49 if args.full_range else delta_star()
    write_csv(CURVE_HEADER, (r.curve_row() for r in curve(0.0, stop, args.points)), args.out)
    print(f"delta* = {delta_star():.9f}; wrote {args.points} rows to {args.out}")


if __name__ == "__main__":
    main()
