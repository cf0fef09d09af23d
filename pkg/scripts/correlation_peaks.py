"""Local maxima of the exact correlation length and their drift with N.

The peaks approach the large-N transition lines as N grows; the shift falls
off roughly as 1/N.
"""

import argparse
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from micromaser import MaserParams
from micromaser.correlation import exact_correlation
from micromaser.phase import theta0_star, theta_maser_maser
from micromaser.trapping import local_peaks


def refine_peak(base, lo, hi, step=1e-3):
    th = np.arange(lo, hi, step)
    lx = [exact_correlation(base.with_(theta=float(t))).log_xi for t in th]
    return float(th[int(np.argmax(lx))])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nb", type=float, default=0.15)
    ap.add_argument("--step", type=float, default=0.02)
    ap.add_argument("--N", type=float, nargs="+", default=[100, 400, 1600])
    ap.add_argument("--workers", type=int, default=8)
    args = ap.parse_args()

    targets = [theta0_star(1.0, 0.0)] + [theta_maser_maser(1.0, args.nb, 0.0, k) for k in range(3)]
    print("large-N targets:", np.round(targets, 4).tolist())
    grid = np.round(np.arange(0.5, 18.0 + 1e-9, args.step), 10)
    base = MaserParams(a=1, n_b=args.nb, theta=1.0, N=args.N[0])
    with ThreadPoolExecutor(args.workers) as ex:
        lx = np.array(list(ex.map(lambda t: exact_correlation(base.with_(theta=float(t))).log_xi, grid)))
    print(f"N = {args.N[0]:g} grid peaks:", grid[local_peaks(lx)].round(3).tolist())

    for k, t in enumerate(targets[1:]):
        pk = [refine_peak(MaserParams(a=1, n_b=args.nb, theta=1.0, N=N), t - 0.6, t + 0.1)
              for N in args.N]
        shifts = ", ".join(f"N={N:g}: {p:.3f} ({p - t:+.3f})" for N, p in zip(args.N, pk))
        print(f"peak near theta*_{k}{k + 1} = {t:.3f}: {shifts}")


if __name__ == "__main__":
    main()
