"""BFGS with exact-curvature restarts and a backtracking line search.

Written for smooth convex objectives whose Hessian is cheap to get along
with the gradient now and then (the max-entropy duals), but it only
relies on that Hessian to seed and refresh the inverse-curvature
estimate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

# fun(x, need_hess) -> (f, g, H or None); f = inf signals an unusable point
Objective = Callable[[np.ndarray, bool], "tuple[float, np.ndarray, Optional[np.ndarray]]"]


@dataclass
class OptimResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    grad_norm: float
    iterations: int
    converged: bool
    message: str


def _inverse_from_hessian(H: np.ndarray) -> np.ndarray:
    """Pseudo-inverse of an SPD-ish matrix after diagonal equilibration."""
    d = np.sqrt(np.maximum(np.abs(np.diag(H)), np.finfo(float).tiny))
    S = H / np.outer(d, d)
    S = 0.5 * (S + S.T)
    w, V = np.linalg.eigh(S)
    floor = max(w.max(), 1.0) * 1e-14
    w = np.maximum(w, floor)
    inv = (V / w) @ V.T
    return inv / np.outer(d, d)


def bfgs(
    fun: Objective,
    x0: np.ndarray,
    grad_tol: float = 1e-8,
    max_iter: int = 500,
    refresh: int = 10,
    norm: Callable[[np.ndarray], float] | None = None,
    c1: float = 1e-4,
    max_backtracks: int = 60,
) -> OptimResult:
    """Minimise ``fun`` from ``x0``.

    Converged when ``norm(grad) < grad_tol`` (default: max-abs). The
    inverse Hessian estimate is rebuilt from the exact Hessian every
    ``refresh`` iterations and whenever the line search or the curvature
    condition fails. Backtracking accepts the first step satisfying the
    Armijo condition, up to a small allowance for rounding noise in ``f``.
    """
    norm = norm or (lambda g: float(np.max(np.abs(g))) if g.size else 0.0)
    x = np.array(x0, dtype=float)
    f, g, H = fun(x, True)
    if not np.isfinite(f):
        return OptimResult(x, f, g, np.inf, 0, False, "objective is not finite at the initial point")

    def refreshed(x, current):
        # exact curvature when available, else keep what we have
        _, _, H = fun(x, True)
        if H is None or not np.all(np.isfinite(H)):
            return current if current is not None else np.eye(len(x))
        return _inverse_from_hessian(H)

    Hinv = refreshed(x, None) if H is None else _inverse_from_hessian(H)
    since_refresh = 0
    tried_gradient = False
    for it in range(max_iter):
        gn = norm(g)
        if gn < grad_tol:
            return OptimResult(x, f, g, gn, it, True, "converged")
        if since_refresh >= refresh:
            Hinv = refreshed(x, Hinv)
            since_refresh = 0
        p = -Hinv @ g
        slope = float(g @ p)
        if not slope < 0:
            Hinv = refreshed(x, Hinv)
            since_refresh = 0
            p = -Hinv @ g
            slope = float(g @ p)
            if not slope < 0:
                p = -g
                slope = -float(g @ g)
        noise = 64 * np.finfo(float).eps * max(1.0, abs(f))
        step = 1.0
        accepted = False
        for _ in range(max_backtracks):
            x_new = x + step * p
            f_new, g_new, _ = fun(x_new, False)
            if np.isfinite(f_new) and f_new <= f + c1 * step * slope + noise:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            # first retry with fresh exact curvature, then with steepest descent
            if since_refresh > 0:
                Hinv = refreshed(x, Hinv)
                since_refresh = 0
                continue
            if not tried_gradient:
                Hinv = np.eye(len(x))
                tried_gradient = True
                continue
            return OptimResult(x, f, g, gn, it, False, "line search failed")
        tried_gradient = False
        s = x_new - x
        y = g_new - g
        x, f, g = x_new, f_new, g_new
        sy = float(s @ y)
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y) and sy > 0:
            rho = 1.0 / sy
            Hy = Hinv @ y
            Hinv = Hinv + (rho * rho * (y @ Hy) + rho) * np.outer(s, s) - rho * (np.outer(Hy, s) + np.outer(s, Hy))
            since_refresh += 1
        else:
            since_refresh = refresh  # force an exact refresh
    gn = norm(g)
    if gn < grad_tol:
        return OptimResult(x, f, g, gn, max_iter, True, "converged")
    return OptimResult(x, f, g, gn, max_iter, False, f"iteration cap {max_iter} reached")
