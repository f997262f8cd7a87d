"""Adaptive composite Gauss-Legendre quadrature for vector integrands.

Refinement is breadth-first with a fixed accept/split rule and a fixed
summation order, so a given integrand always produces the same bits.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

ORDER = 20
QUAD_RTOL = 1e-10
MAX_LEVEL = 40
MAX_PANELS = 1 << 16

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(ORDER)


class QuadratureError(RuntimeError):
    pass


def _panel_sums(f, lo: np.ndarray, hi: np.ndarray):
    """Gauss-Legendre estimates of ``f`` and ``|f|`` over each panel."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = (mid[:, None] + half[:, None] * _NODES[None, :]).ravel()
    vals = f(x)  # (len(x), p)
    vals = vals.reshape(len(lo), ORDER, -1)
    w = (half[:, None] * _WEIGHTS[None, :])[:, :, None]
    return np.sum(w * vals, axis=1), np.sum(w * np.abs(vals), axis=1)


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    rtol: float = QUAD_RTOL,
    n_init: int = 16,
) -> np.ndarray:
    """Integrate a vector-valued ``f`` over ``[a, b]``.

    Parameters
    ----------
    f : callable
        Maps a 1-d array of abscissae of length ``n`` to an ``(n, p)``
        array. All components share one panel partition.
    a, b : float
        Finite limits with ``a < b``.
    rtol : float
        A panel is accepted when, for every component, the difference
        between the whole-panel rule and the sum over its two halves is at
        most ``rtol`` times the integral of ``|f_j|`` over ``[a, b]``.
    n_init : int
        Number of equal panels to start from.

    Returns
    -------
    ndarray of shape (p,)
    """
    if not (np.isfinite(a) and np.isfinite(b) and a < b):
        raise ValueError(f"need finite a < b, got [{a}, {b}]")
    edges = np.linspace(a, b, max(1, int(n_init)) + 1)
    lo, hi = edges[:-1], edges[1:]
    whole, absw = _panel_sums(f, lo, hi)
    scale = absw.sum(axis=0)
    done: list[np.ndarray] = []
    for _ in range(MAX_LEVEL):
        mid = 0.5 * (lo + hi)
        left, absl = _panel_sums(f, lo, mid)
        right, absr = _panel_sums(f, mid, hi)
        fine = left + right
        # refine the scale as panels are split; it only grows more accurate
        scale = np.maximum(scale, absl.sum(axis=0) + absr.sum(axis=0))
        tiny = np.finfo(float).tiny
        ok = np.all(np.abs(fine - whole) <= rtol * np.maximum(scale, tiny), axis=1)
        done.append(fine[ok].sum(axis=0) if np.any(ok) else np.zeros(fine.shape[1]))
        bad = ~ok
        if not np.any(bad):
            break
        if 2 * np.count_nonzero(bad) > MAX_PANELS:
            raise QuadratureError(f"quadrature on [{a}, {b}] needs more than {MAX_PANELS} panels")
        lo = np.concatenate([lo[bad], mid[bad]])
        hi = np.concatenate([mid[bad], hi[bad]])
        whole = np.concatenate([left[bad], right[bad]])
    else:
        raise QuadratureError(f"quadrature on [{a}, {b}] did not converge in {MAX_LEVEL} levels")
    total = np.zeros_like(done[0])
    for part in done:
        total = total + part
    return total


def panel_masses(f: Callable[[np.ndarray], np.ndarray], edges: np.ndarray) -> np.ndarray:
    """Single-rule Gauss-Legendre integral of a scalar ``f`` on each panel."""
    edges = np.asarray(edges, dtype=float)
    est, _ = _panel_sums(lambda x: f(x)[:, None], edges[:-1], edges[1:])
    return est[:, 0]
