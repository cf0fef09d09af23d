"""Print the critical pump values, critical detuning and triple points."""

import argparse

from micromaser.phase import (critical_detuning, theta0_star, theta_k, theta_maser_maser,
                              theta_maser_thermal, theta_thermal_maser, triple_points)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nb", type=float, default=0.15)
    ap.add_argument("--delta", type=float, default=0.5)
    args = ap.parse_args()
    nb, D = args.nb, args.delta

    print("branch births at a = 1:")
    for k in range(1, 6):
        print(f"  theta_{k} = {theta_k(1.0, k):.4f}")
    print("maser-maser lines at a = 1, zero detuning:")
    for k in range(3):
        print(f"  theta*_{k}{k + 1} = {theta_maser_maser(1.0, nb, 0.0, k):.4f}")
    print(f"detuned set at |Delta| = {D}:")
    print(f"  theta0*   = {theta0_star(1.0, D):.4f}")
    for k in range(2):
        print(f"  theta*_{k}t = {theta_maser_thermal(1.0, D, k):.4f}")
        print(f"  theta*_t{k + 1} = {theta_thermal_maser(1.0, nb, D, k + 1):.4f}")
    print(f"  theta*_23 = {theta_maser_maser(1.0, nb, D, 2):.4f}")
    for k in range(3):
        print(f"critical detuning |Delta_{k}{k + 1}| = {critical_detuning(nb, k):.4f}")
    for tp in triple_points(nb, D):
        print(f"triple point k={tp.k}: a = {tp.a:.4f}, theta = {tp.theta:.4f}")


if __name__ == "__main__":
    main()
