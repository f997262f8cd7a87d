"""Max-entropy fit of the exponential(2) moments from random starts.

The dual is strictly convex, so every start should reach the same
coefficients (-ln 2, 2, 0, 0, 0).

    python3 demos/maxent_restarts.py [--restarts 100]
"""

import argparse
import math

import numpy as np

from wrdpg.generator import make_rng
from wrdpg.maxent import MaxEntDensity, default_support, dual_gradient, fit_maxent, fit_restarts


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--restarts", type=int, default=100)
    ap.add_argument("--seed", type=int, default=3)
    args = ap.parse_args()

    m = np.array([math.factorial(k) / 2.0**k for k in range(5)])
    support = default_support(m)
    truth = np.array([-math.log(2), 2, 0, 0, 0])
    g = fit_maxent(m, support, truncated=True)
    print(f"support [{support[0]:g}, {support[1]:g}], tail mass {g.tail_mass:.2e}, entropy {g.entropy():.8f}")
    runs = fit_restarts(m, support, args.restarts, make_rng(args.seed), truncated=True)
    good = [r for r in runs if isinstance(r, MaxEntDensity)]
    err = max(np.max(np.abs(r.lambdas - truth)) for r in good)
    grad = max(np.max(np.abs(dual_gradient(r.lambdas, m, support))) for r in good)
    print(f"{len(good)}/{len(runs)} converged; max |lambda - truth| {err:.2e}; max |grad| {grad:.2e}")


if __name__ == "__main__":
    main()
