"""Recovering a finitely supported pmf from its moments."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np
import scipy.linalg
import scipy.optimize

TOL_NEG = 1e-10
TOL_SUM = 1e-8
COND_LIMIT = 1e12


class IllConditionedError(np.linalg.LinAlgError):
    pass


class InfeasibleError(ValueError):
    pass


@dataclass(frozen=True)
class DiscretePmf:
    """Probabilities ``probs`` on strictly increasing support ``values``.

    ``probs`` is whatever the solver produced; ``valid`` records whether it
    is a proper pmf (entries ``>= -TOL_NEG``, sum 1 within ``TOL_SUM``).
    """

    values: np.ndarray
    probs: np.ndarray
    residual: float = 0.0

    @property
    def valid(self) -> bool:
        return bool(np.all(self.probs >= -TOL_NEG) and abs(self.probs.sum() - 1.0) <= TOL_SUM)

    def moment(self, k: int) -> float:
        return float(np.sum(self.probs * self.values**k))

    def moments(self, K: int) -> np.ndarray:
        return np.array([self.moment(k) for k in range(K + 1)])

    def sampling_probs(self) -> np.ndarray:
        """Negative entries clipped to zero and renormalised."""
        p = np.clip(self.probs, 0.0, None)
        s = p.sum()
        if s <= 0:
            raise ValueError("pmf has no positive mass")
        return p / s


def _prepare_support(values, probs=None):
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("support must be a non-empty 1-d sequence")
    order = np.argsort(v, kind="stable")
    v = v[order]
    if np.any(np.diff(v) == 0):
        raise ValueError("support values must be distinct")
    return v, order


def cleanup(pmf: DiscretePmf, tol_neg: float = TOL_NEG) -> DiscretePmf:
    """Clamp negatives of magnitude ``<= tol_neg`` to zero and renormalise.

    Larger negative entries are left in place (the result stays invalid).
    """
    p = pmf.probs.copy()
    p[(p < 0) & (p >= -tol_neg)] = 0.0
    s = p.sum()
    if s > 0:
        p = p / s
    return DiscretePmf(pmf.values, p, pmf.residual)


def vandermonde_matrix(values, K: int) -> np.ndarray:
    """``V[k, r] = v_r ** k`` for ``k = 0..K`` (``0 ** 0 = 1``)."""
    v = np.asarray(values, dtype=float)
    return v[None, :] ** np.arange(K + 1)[:, None]


def _expert_solve(A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float]:
    """LAPACK ``gesvx`` with equilibration: solution and reciprocal condition."""
    out = scipy.linalg.lapack.dgesvx(np.asarray(A, dtype=float), np.asarray(b, dtype=float), fact="E")
    x, rcond, info = out[7], out[8], out[-1]
    if info > A.shape[0]:
        info = 0  # rcond below machine precision; reported through rcond
    if info > 0:
        raise np.linalg.LinAlgError(f"singular system (pivot {info} is zero)")
    return np.asarray(x).reshape(-1), float(rcond)


def condition_number(A: np.ndarray) -> float:
    """Condition estimate of the equilibrated matrix, as used by the solver."""
    A = np.asarray(A, dtype=float)
    try:
        _, rcond = _expert_solve(A, np.ones(A.shape[0]))
    except np.linalg.LinAlgError:
        return np.inf
    return np.inf if rcond == 0 else 1.0 / rcond


def vandermonde_solve(values, m, cond_limit: float = COND_LIMIT) -> DiscretePmf:
    """Solve the square monomial system ``V p = m`` directly.

    ``len(m)`` must equal ``len(values)``. The raw solution is returned;
    check :attr:`DiscretePmf.valid`.

    Raises
    ------
    IllConditionedError
        If the condition number of ``V`` exceeds ``cond_limit``.
    """
    v, _ = _prepare_support(values)
    m = np.asarray(m, dtype=float)
    if len(m) != len(v):
        raise ValueError(f"need exactly {len(v)} moments (m[0..{len(v) - 1}]), got {len(m)}")
    V = vandermonde_matrix(v, len(v) - 1)
    try:
        p, rcond = _expert_solve(V, m)
    except np.linalg.LinAlgError as exc:
        raise IllConditionedError(f"{exc}; use chebyshev_vandermonde_solve instead") from None
    cond = np.inf if rcond == 0 else 1.0 / rcond
    if not cond <= cond_limit:
        raise IllConditionedError(
            f"monomial Vandermonde condition number {cond:.3g} exceeds {cond_limit:.0e}; "
            "use chebyshev_vandermonde_solve instead"
        )
    return DiscretePmf(v, p, float(np.linalg.norm(V @ p - m)))


@lru_cache(maxsize=None)
def _cheb_tables(K: int) -> tuple[tuple[tuple[Fraction, ...], ...], tuple[tuple[int, ...], ...]]:
    # x^k in the Chebyshev basis (rows), and T_k in the monomial basis (rows)
    mono = [[Fraction(0)] * (K + 1) for _ in range(K + 1)]
    mono[0][0] = Fraction(1)
    for k in range(K):
        row = mono[k]
        nxt = mono[k + 1]
        for j, c in enumerate(row):
            if c == 0:
                continue
            if j == 0:
                nxt[1] += c
            else:
                nxt[j + 1] += c / 2
                nxt[j - 1] += c / 2
    cheb = [[0] * (K + 1) for _ in range(K + 1)]
    cheb[0][0] = 1
    if K >= 1:
        cheb[1][1] = 1
    for k in range(1, K):
        for j in range(K + 1):
            val = -cheb[k - 1][j]
            if j > 0:
                val += 2 * cheb[k][j - 1]
            cheb[k + 1][j] = val
    return tuple(tuple(r) for r in mono), tuple(tuple(r) for r in cheb)


def monomial_to_chebyshev_coeffs(K: int) -> np.ndarray:
    """``C[k, j]`` with ``x^k = sum_j C[k, j] T_j(x)``, for ``k, j <= K``."""
    if K < 0:
        raise ValueError("K must be >= 0")
    mono, _ = _cheb_tables(int(K))
    return np.array([[float(c) for c in row] for row in mono])


def chebyshev_to_monomial_coeffs(K: int) -> np.ndarray:
    """``A[k, j]`` with ``T_k(x) = sum_j A[k, j] x^j``; the inverse of
    :func:`monomial_to_chebyshev_coeffs`."""
    _, cheb = _cheb_tables(int(K))
    return np.array(cheb, dtype=float)


def chebyshev_vandermonde(values_mapped, K: int) -> np.ndarray:
    """``V_C[k, r] = T_k(v*_r)``."""
    x = np.asarray(values_mapped, dtype=float)
    T = np.empty((K + 1, len(x)))
    T[0] = 1.0
    if K >= 1:
        T[1] = x
    for k in range(1, K):
        T[k + 1] = 2 * x * T[k] - T[k - 1]
    return T


def affine_moments(m, shift: float, scale: float) -> np.ndarray:
    """Moments of ``(X - shift) / scale`` from raw moments of ``X``."""
    m = np.asarray(m, dtype=float)
    K = len(m) - 1
    out = np.empty(K + 1)
    for k in range(K + 1):
        terms = [comb(k, j) * m[j] * (-shift) ** (k - j) for j in range(k + 1)]
        out[k] = np.sum(terms) / scale**k
    return out


def chebyshev_moments(values, m):
    """Map the support to [-1, 1] and return ``(v_star, E[T_k(v_star)])``."""
    v, _ = _prepare_support(values)
    m = np.asarray(m, dtype=float)
    lo, hi = v[0], v[-1]
    center, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    mapped = affine_moments(m, center, half)
    # E[T_k] = sum_j A[k, j] E[v*^j]
    t = chebyshev_to_monomial_coeffs(len(m) - 1) @ mapped
    return (v - center) / half, t


def chebyshev_vandermonde_solve(
    values, m, nonneg: bool = False, residual_tol: float = 1e-6
) -> DiscretePmf:
    """Recover a pmf in the Chebyshev basis.

    The support is mapped affinely onto ``[-1, 1]`` and the moments
    re-expressed as Chebyshev moments ``E[T_k(v*)]``. With ``K == R`` the
    square system is solved directly, with ``K > R`` by least squares. With
    ``nonneg=True`` the problem ``min_{p >= 0} ||V_C p - m_C||`` is solved
    by the Lawson-Hanson active-set method.

    Raises
    ------
    InfeasibleError
        If the relative residual exceeds ``residual_tol`` (only checked
        for ``nonneg=True`` and least-squares solves).
    """
    v, _ = _prepare_support(values)
    m = np.asarray(m, dtype=float)
    K, R = len(m) - 1, len(v) - 1
    if K < R:
        raise ValueError(f"need at least {R + 1} moments for {R + 1} support points, got {K + 1}")
    if R == 0:
        return DiscretePmf(v, np.array([m[0]]), 0.0)
    v_star, t = chebyshev_moments(v, m)
    VC = chebyshev_vandermonde(v_star, K)
    if nonneg:
        p, _ = scipy.optimize.nnls(VC, t, maxiter=50 * (R + 1))
    elif K == R:
        p = scipy.linalg.solve(VC, t)
    else:
        p = scipy.linalg.lstsq(VC, t)[0]
    residual = float(np.linalg.norm(VC @ p - t))
    rel = residual / max(1.0, float(np.linalg.norm(t)))
    if (nonneg or K > R) and rel > residual_tol:
        raise InfeasibleError(
            f"moment system has no {'nonnegative ' if nonneg else ''}solution: "
            f"relative residual {rel:.3g} > {residual_tol:.1e}"
        )
    return DiscretePmf(v, p, residual)


def moment_depth(values, m) -> float:
    """Largest ``t`` such that some ``p`` with moments ``m`` on ``values`` has all ``p_r >= t``.

    Positive exactly when ``m`` lies in the interior of the moment space
    of ``values`` (a strictly positive pmf matches it), zero on its
    boundary and negative outside. Concave in ``m``. Solved as a linear
    programme in the Chebyshev basis; ``-inf`` when no signed solution
    exists either.
    """
    v, _ = _prepare_support(values)
    m = np.asarray(m, dtype=float)
    R = len(v) - 1
    if R == 0:
        exact = np.allclose(m, m[0] * v[0] ** np.arange(len(m)))
        return float(m[0]) if exact else -np.inf
    v_star, t = chebyshev_moments(v, m)
    VC = chebyshev_vandermonde(v_star, len(m) - 1)
    n = R + 1
    cost = np.r_[np.zeros(n), -1.0]
    A_ub = np.hstack([-np.eye(n), np.ones((n, 1))])
    res = scipy.optimize.linprog(
        cost, A_ub=A_ub, b_ub=np.zeros(n), A_eq=np.hstack([VC, np.zeros((len(t), 1))]), b_eq=t,
        bounds=[(None, None)] * (n + 1), method="highs",
    )
    if res.status != 0:
        return -np.inf
    return float(res.x[-1])


def depth_mixing_weight(values, m, reference, floor: float) -> float:
    """Smallest ``t`` in [0, 1] with ``moment_depth((1 - t) m + t reference) >= floor``.

    One linear programme in ``(p, t)``; ``nan`` when even ``t = 1`` fails.
    """
    v, _ = _prepare_support(values)
    v_star, tm = chebyshev_moments(v, m)
    _, tr = chebyshev_moments(v, reference)
    VC = chebyshev_vandermonde(v_star, len(tm) - 1)
    n = len(v)
    res = scipy.optimize.linprog(
        np.r_[np.zeros(n), 1.0], A_eq=np.hstack([VC, (tm - tr)[:, None]]), b_eq=tm,
        bounds=[(floor, None)] * n + [(0.0, 1.0)], method="highs",
    )
    return float(res.x[-1]) if res.status == 0 else float("nan")


def chebyshev_condition_number(values, K: int | None = None) -> float:
    v, _ = _prepare_support(values)
    K = len(v) - 1 if K is None else K
    lo, hi = v[0], v[-1]
    v_star = (v - 0.5 * (lo + hi)) / (0.5 * (hi - lo))
    return condition_number(chebyshev_vandermonde(v_star, K))
