"""Limit rate vs scheduled-code rate over delta, for each space and a few n.

Usage: python3 scripts/rd_curves.py [--mode worst|average] [--out curves.csv]
"""
import argparse
import sys
from dataclasses import dataclass

import numpy as np

from permrd.rd_harness import rd_curve, write_csv


@dataclass
class Config:
    spaces: tuple = ("tau", "l1", "linf", "invl1")
    ns: tuple = (100, 1000, 10_000)
    deltas: tuple = tuple(np.round(np.linspace(0.1, 0.9, 9), 3))
    mode: str = "worst"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--mode", choices=("worst", "average"), default="worst")
    ap.add_argument("--out")
    args = ap.parse_args()
    cfg = Config(mode=args.mode)
    rows = []
    for space in cfg.spaces:
        for n in cfg.ns:
            rows.extend(rd_curve(space, n, cfg.deltas, cfg.mode))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, sys.stdout)


if __name__ == "__main__":
    main()
