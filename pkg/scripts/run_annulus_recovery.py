"""Convergence study: Dirichlet solve on the annulus against the exact radial
solution, error table over a sequence of grid spacings."""

import argparse
import time

import numpy as np

from rupture_lab import SolveConfig, annulus_grid, solve_dirichlet
from rupture_lab.profiles import radial_exact


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--p", type=float, default=3.0)
    ap.add_argument("--levels", type=int, nargs="+", default=[128, 256, 512])
    args = ap.parse_args()

    ex = radial_exact(2, args.p)
    prev = None
    print("  1/h    interior   iters   max error     ratio   seconds")
    for n in args.levels:
        h = 1.0 / n
        t0 = time.time()
        grid = annulus_grid((0.0, 0.0), 0.2, 1.0, h)
        res = solve_dirichlet(grid, args.p, ex, cfg=SolveConfig(residual_tol=1e-9))
        err = float(np.max(np.abs(res.u.values - ex.sample(grid).values)[grid.interior_mask]))
        ratio = prev / err if prev else float("nan")
        print(f"{n:5d} {int(grid.interior_mask.sum()):10d} {res.newton_iters:7d} "
              f"{err:12.3e} {ratio:9.2f} {time.time() - t0:9.1f}")
        prev = err


if __name__ == "__main__":
    main()
