"""Compare the sum-rule correlation length with the exact value at zero temperature."""

import argparse

import numpy as np

from micromaser import MaserParams
from micromaser.correlation import exact_correlation, xi_sumrule


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=float, default=100)
    ap.add_argument("--thetas", type=float, nargs="+",
                    default=[0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0])
    args = ap.parse_args()
    print(f"{'theta':>6} {'sum rule':>14} {'exact':>14} {'rel diff':>9}")
    for th in args.thetas:
        p = MaserParams(a=1, n_b=0.0, theta=th, N=args.N)
        s, e = xi_sumrule(p).xi, exact_correlation(p).xi
        print(f"{th:6.2f} {s:14.6g} {e:14.6g} {abs(s - e) / e:9.3%}")


if __name__ == "__main__":
    main()
