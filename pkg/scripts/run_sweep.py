#!/usr/bin/env python3
"""Empirical phase transition of Wirtinger Flow on complex Gaussian
ensembles: recovery rate against the oversampling ratio M/N."""

import sys

from wflift.cli import main

DEFAULT = ["sweep", "--n", "64", "--ratios", "2,3,4,5,6,8,10", "--trials", "50", "--out", "sweep.csv"]

if __name__ == "__main__":
    sys.exit(main(DEFAULT + sys.argv[1:]))
