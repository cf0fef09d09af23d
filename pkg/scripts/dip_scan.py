"""Trapping dips of the order parameter at zero temperature."""

import argparse

import numpy as np

from micromaser import MaserParams
from micromaser.trapping import dip_scan


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=float, default=100)
    ap.add_argument("--delta", type=float, default=0.0)
    ap.add_argument("--step", type=float, default=0.005)
    ap.add_argument("--range", type=float, nargs=2, default=[1.0, 15.0])
    ap.add_argument("--workers", type=int, default=8)
    args = ap.parse_args()
    grid = np.arange(args.range[0], args.range[1], args.step)
    p = MaserParams(a=1, n_b=0.0, Delta=args.delta, theta=1.0, N=args.N)
    print(f"{'theta':>8} {'<x>':>8} {'baseline':>9} {'depth':>8} {'m':>4} {'k':>2} {'distance':>9}")
    for d in dip_scan(p, grid, workers=args.workers):
        m, k = (d.nearest.m, d.nearest.k) if d.nearest else ("-", "-")
        print(f"{d.theta:8.3f} {d.x:8.4f} {d.baseline:9.4f} {d.depth:8.5f} {m:>4} {k:>2} {d.distance:9.4f}")


if __name__ == "__main__":
    main()
