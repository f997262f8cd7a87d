"""Adjacency spectral embedding of entrywise weight powers.

The eigendecomposition is done with dense LAPACK routines and a fixed
ordering/sign convention, so identical input gives identical bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np
import scipy.linalg

from .graph import WeightedGraph, format_float, hadamard_power


class NegativeEigenvalueError(ValueError):
    """A retained eigenvalue of the moment matrix is negative."""


@dataclass(frozen=True)
class Embedding:
    """Estimated latent positions for one moment order.

    ``positions`` is ``n x d`` (row ``i`` is node ``i``); ``eigvals`` holds
    the retained eigenvalues, largest first.
    """

    positions: np.ndarray
    eigvals: np.ndarray
    k: int = 1

    @property
    def n_nodes(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    def gram(self) -> np.ndarray:
        return self.positions @ self.positions.T


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _order(values: np.ndarray) -> np.ndarray:
    # magnitude descending, then signed value descending, then original index
    idx = np.arange(len(values))
    return np.array(sorted(idx, key=lambda i: (-abs(values[i]), -values[i], i)), dtype=int)


def _check_square(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def _ends(M: np.ndarray, d: int):
    """Eigenpairs at both ends of the spectrum, ascending order.

    The ``d`` largest-magnitude eigenvalues are always among the ``d``
    smallest and ``d`` largest signed ones, so two subset calls suffice.
    """
    n = M.shape[0]
    if 2 * d >= n:
        return scipy.linalg.eigh(M)
    lo_w, lo_v = scipy.linalg.eigh(M, subset_by_index=[0, d - 1])
    hi_w, hi_v = scipy.linalg.eigh(M, subset_by_index=[n - d, n - 1])
    return np.concatenate([lo_w, hi_w]), np.hstack([lo_v, hi_v])


def eig_sym_topd(M: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Top-``d`` eigenpairs of a symmetric matrix by magnitude.

    Returns ``(values, vectors)`` with ``values`` sorted by decreasing
    magnitude (ties: larger signed value first) and unit eigenvectors as
    columns, each signed so its largest-magnitude entry is positive.
    """
    M = _check_square(M)
    n = M.shape[0]
    if not 1 <= d <= n:
        raise ValueError(f"d must satisfy 1 <= d <= n={n}, got {d}")
    try:
        w, V = _ends(M, d)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"eigensolver did not converge: {exc}") from exc
    order = _order(w)[:d]
    return w[order], _fix_signs(V[:, order])


def _roundoff(M: np.ndarray, values: np.ndarray) -> float:
    scale = max(np.max(np.abs(values)), np.finfo(float).tiny)
    return M.shape[0] * np.finfo(float).eps * scale


def ase(M: np.ndarray, d: int, negative_policy: str = "error", k: int = 1) -> Embedding:
    """Adjacency spectral embedding ``U_d |D_d|^{1/2}`` of a symmetric matrix.

    Parameters
    ----------
    M : ndarray of shape (n, n)
        Symmetric matrix, typically an entrywise power of the weights.
    d : int
        Embedding dimension.
    negative_policy : {"error", "clamp"}
        What to do when a top-magnitude eigenvalue is negative. ``"error"``
        raises :class:`NegativeEigenvalueError`; ``"clamp"`` keeps the ``d``
        largest positive eigenvalues instead.
    k : int
        Moment order, recorded on the result.
    """
    if negative_policy not in ("error", "clamp"):
        raise ValueError(f"unknown negative_policy {negative_policy!r}")
    M = _check_square(M)
    values, vectors = eig_sym_topd(M, d)
    tol = _roundoff(M, values)
    if np.any(values < -tol):
        if negative_policy == "error":
            bad = ", ".join(format_float(v) for v in values[values < -tol])
            raise NegativeEigenvalueError(
                f"k={k}: retained eigenvalue(s) {bad} are negative; "
                "the moment matrix is not positive semidefinite at this rank "
                "(use negative_policy='clamp' or a smaller d)"
            )
        n = M.shape[0]
        w, V = scipy.linalg.eigh(M, subset_by_index=[n - d, n - 1])
        order = np.argsort(-w, kind="stable")
        values, vectors = w[order], _fix_signs(V[:, order])
        if np.any(values <= tol):
            raise NegativeEigenvalueError(
                f"k={k}: fewer than d={d} positive eigenvalues "
                f"(largest {d}: {', '.join(format_float(v) for v in values)})"
            )
    values = np.clip(values, 0.0, None)
    return Embedding(vectors * np.sqrt(values), values, int(k))


def embed_moments(
    graph: WeightedGraph | np.ndarray, d: int, K: int, negative_policy: str = "error"
) -> list[Embedding]:
    """ASE of ``W^(k)`` for ``k = 1..K``.

    The zeroth moment is not embedded; it is identically 1.
    """
    if int(K) != K or K < 1:
        raise ValueError(f"K must be an integer >= 1, got {K}")
    return [ase(hadamard_power(graph, k), d, negative_policy, k=k) for k in range(1, K + 1)]


def procrustes_align(X: np.ndarray, Y: np.ndarray) -> tuple[np.ndarray, float]:
    """Orthogonal ``Q`` minimising ``||X Q - Y||_F``.

    ``Q`` is the polar factor ``U V^T`` of ``X^T Y = U S V^T``.

    Returns
    -------
    Q : ndarray of shape (d, d)
    residual : float
        ``||X Q - Y||_F``.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape != Y.shape:
        raise ValueError(f"shape mismatch: {X.shape} vs {Y.shape}")
    if X.ndim == 1:
        X, Y = X[:, None], Y[:, None]
    U, _, Vt = np.linalg.svd(X.T @ Y)
    Q = U @ Vt
    return Q, float(np.linalg.norm(X @ Q - Y))


def two_to_infinity(E: np.ndarray) -> float:
    """Maximum Euclidean row norm."""
    E = np.asarray(E, dtype=float)
    return float(np.max(np.linalg.norm(E.reshape(E.shape[0], -1), axis=1)))


def scree(M: np.ndarray) -> np.ndarray:
    """All eigenvalue magnitudes of a symmetric matrix, descending."""
    w = scipy.linalg.eigvalsh(_check_square(M))
    return np.sort(np.abs(w))[::-1]


def profile_loglik(values: np.ndarray) -> np.ndarray:
    """Profile log-likelihood of each split ``q = 1..p-1`` of a scree.

    Both groups are Gaussian with their own mean and a pooled variance
    (Zhu & Ghodsi, 2006). Entry ``q-1`` is the likelihood for ``q``. A
    split with zero pooled variance scores ``+inf``.
    """
    x = np.asarray(values, dtype=float)
    p = len(x)
    out = np.empty(max(p - 1, 0))
    for q in range(1, p):
        a, b = x[:q], x[q:]
        ss = np.sum((a - a.mean()) ** 2) + np.sum((b - b.mean()) ** 2)
        var = ss / p
        if var <= 1e-300:
            out[q - 1] = np.inf
        else:
            out[q - 1] = -0.5 * p * np.log(2 * np.pi * var) - 0.5 * p
    return out


def select_dimension(eigvals: Sequence[float], max_d: int | None = None) -> int:
    """Elbow of a scree plot by profile likelihood.

    ``eigvals`` must be sorted by decreasing magnitude. The result lies in
    ``[1, max_d]`` (default ``min(p - 1, 20)``). A spectrum without an
    elbow (e.g. constant) gives 1.
    """
    x = np.abs(np.asarray(eigvals, dtype=float))
    if x.size == 0:
        raise ValueError("empty spectrum")
    p = x.size
    if max_d is None:
        max_d = min(p - 1, 20)
    max_d = max(1, min(int(max_d), p - 1))
    if p <= 2 or np.ptp(x) == 0:
        return 1
    ll = profile_loglik(x)[:max_d]
    return int(np.argmax(ll)) + 1


def dump_embedding(emb: Embedding, dest: IO[str] | None = None) -> str:
    """Header ``n d k``, then ``n`` rows of positions, then the eigenvalues."""
    lines = [f"{emb.n_nodes} {emb.dim} {emb.k}"]
    lines += [" ".join(format_float(v) for v in row) for row in emb.positions]
    lines.append(" ".join(format_float(v) for v in emb.eigvals))
    text = "\n".join(lines) + "\n"
    if dest is not None:
        dest.write(text)
    return text


def load_embedding(source: IO[str] | str) -> Embedding:
    text = source if isinstance(source, str) else source.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    n, d, k = (int(t) for t in lines[0].split())
    pos = np.array([[float(t) for t in ln.split()] for ln in lines[1 : 1 + n]]).reshape(n, d)
    vals = np.array([float(t) for t in lines[1 + n].split()])
    return Embedding(pos, vals, k)
