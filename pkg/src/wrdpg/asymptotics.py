"""Limiting covariance of SBM embeddings and the matching confidence ellipses."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .graph import format_float
from .model import CommunityPositions, SbmSpec


class SingularCovarianceError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class CovarianceSpec:
    """Limiting covariance ``Sigma`` of ``sqrt(N) (x_hat_i Q - x_i)`` for
    nodes of community ``community`` at moment order ``k``."""

    k: int
    community: int
    Sigma: np.ndarray
    Delta: np.ndarray


def second_moment_matrix(spec: SbmSpec, positions: CommunityPositions, k: int) -> np.ndarray:
    Y = positions[k]
    return np.einsum("m,mi,mj->ij", spec.pi, Y, Y)


def sbm_covariance(spec: SbmSpec, positions: CommunityPositions, k: int, l: int) -> CovarianceSpec:
    """Asymptotic covariance of community ``l`` embeddings at order ``k``.

    ``Sigma = Delta^{-1} Sigma_tilde Delta^{-1}`` with
    ``Delta = sum_m pi_m y_m y_m^T`` and
    ``Sigma_tilde = sum_m pi_m (b_lm m_lm[2k] - b_lm^2 m_lm[k]^2) y_m y_m^T``.
    """
    Y = positions[k]
    Delta = second_moment_matrix(spec, positions, k)
    if np.linalg.matrix_rank(Delta) < Delta.shape[0]:
        raise SingularCovarianceError(
            f"k={k}: second-moment matrix Delta is singular (latent positions do not span R^d)"
        )
    var = np.array(
        [
            spec.B[l, m] * spec.block_moment(l, m, 2 * k) - (spec.B[l, m] * spec.block_moment(l, m, k)) ** 2
            for m in range(spec.C)
        ]
    )
    tilde = np.einsum("m,mi,mj->ij", spec.pi * var, Y, Y)
    Dinv = np.linalg.inv(Delta)
    Sigma = Dinv @ tilde @ Dinv
    Sigma = 0.5 * (Sigma + Sigma.T)
    return CovarianceSpec(int(k), int(l), Sigma, Delta)


def chi2_quantile(level: float, dof: int) -> float:
    return float(stats.chi2.ppf(level, dof))


@dataclass(frozen=True)
class Ellipse:
    """Level set ``{z : (z - c)^T (Sigma / N)^{-1} (z - c) <= threshold}``.

    ``axes`` holds unit principal directions as columns and ``radii`` the
    matching semi-axis lengths. ``degenerate`` is set when ``Sigma`` is
    singular, in which case some radii are zero.
    """

    center: np.ndarray
    axes: np.ndarray
    radii: np.ndarray
    threshold: float
    degenerate: bool

    def quadratic_form(self, points: np.ndarray) -> np.ndarray:
        """Scaled squared distance; ``<= 1`` means inside."""
        z = (np.atleast_2d(points) - self.center) @ self.axes
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(self.radii > 0, z / np.where(self.radii > 0, self.radii, 1.0), np.where(z == 0, 0.0, np.inf))
        return np.sum(q**2, axis=1)

    def contains(self, points: np.ndarray) -> np.ndarray:
        return self.quadratic_form(points) <= 1.0

    def boundary(self, n: int = 256) -> np.ndarray:
        if len(self.center) != 2:
            raise ValueError("boundary is only defined for 2-d ellipses")
        t = np.linspace(0, 2 * np.pi, n, endpoint=False)
        circle = np.stack([np.cos(t), np.sin(t)], axis=1)
        return self.center + (circle * self.radii) @ self.axes.T


def confidence_ellipse(cov: CovarianceSpec | np.ndarray, center, level: float = 0.95, N: int = 1) -> Ellipse:
    """Confidence region of ``N(center, Sigma / N)`` at ``level``.

    Radii are ``sqrt(chi2_d(level) * eig(Sigma) / N)``.
    """
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    Sigma = cov.Sigma if isinstance(cov, CovarianceSpec) else np.atleast_2d(np.asarray(cov, dtype=float))
    d = Sigma.shape[0]
    center = np.asarray(center, dtype=float).reshape(d)
    threshold = chi2_quantile(level, d)
    w, V = np.linalg.eigh(Sigma)
    order = np.argsort(-w, kind="stable")
    w, V = w[order], V[:, order]
    tol = d * np.finfo(float).eps * max(abs(w).max(), np.finfo(float).tiny)
    degenerate = bool(np.any(w <= tol))
    w = np.where(w <= tol, 0.0, w)
    radii = np.sqrt(threshold * w / N)
    return Ellipse(center, V, radii, threshold, degenerate)


def ellipses_overlap(a: Ellipse, b: Ellipse, resolution: int = 4096) -> bool:
    """Whether two 2-d ellipses intersect (as filled regions)."""
    if a.contains(b.center[None])[0] or b.contains(a.center[None])[0]:
        return True
    return bool(np.any(b.contains(a.boundary(resolution))) or np.any(a.contains(b.boundary(resolution))))


def coverage(points: np.ndarray, ellipse: Ellipse) -> float:
    """Fraction of ``points`` inside ``ellipse``."""
    return float(np.mean(ellipse.contains(points)))


def format_covariance(cov: CovarianceSpec, ellipse: Ellipse | None = None) -> str:
    """Structured text record for plotting tools."""
    lines = [f"k {cov.k}", f"community {cov.community}"]
    lines.append("sigma " + " ".join(format_float(v) for v in cov.Sigma.ravel()))
    lines.append("delta " + " ".join(format_float(v) for v in cov.Delta.ravel()))
    if ellipse is not None:
        lines.append("center " + " ".join(format_float(v) for v in ellipse.center))
        lines.append("radii " + " ".join(format_float(v) for v in ellipse.radii))
        lines.append("axes " + " ".join(format_float(v) for v in ellipse.axes.ravel()))
        lines.append(f"threshold {format_float(ellipse.threshold)}")
        lines.append(f"degenerate {int(ellipse.degenerate)}")
    return "\n".join(lines) + "\n"
