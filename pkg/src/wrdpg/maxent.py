"""Maximum-entropy densities matching a finite moment sequence.

The density ``g(x) = exp(-sum_k lambda_k x^k)`` on an interval is found by
minimising the convex dual

    d(lambda) = sum_k lambda_k m_k + int exp(-sum_k lambda_k x^k) dx - m_0,

whose gradient is ``m_k - int x^k g``. The minimisation is done in a
standardised coordinate ``u = (x - center) / scale`` (the target mean and
standard deviation when available), which keeps the exponent and the
curvature of the dual well scaled; coefficients are mapped between
coordinates exactly by binomial expansion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import IO, Sequence

import numpy as np
import scipy.interpolate

from .discrete import TOL_NEG, DiscretePmf, affine_moments, moment_depth
from .graph import format_float
from .model import (
    TOL_HANKEL_ESTIMATED,
    hankel_psd_check,
    min_hankel_eigenvalue,
    min_moment_eigenvalue,
    moment_space_check,
)
from .optimize import OptimResult, bfgs
from .quadrature import QUAD_RTOL, QuadratureError, integrate, panel_masses

EXP_LIMIT = 700.0
TAIL_LIMIT = 1e-8
SAMPLE_PANELS = 4096
SAMPLE_HALF_WIDTH = 40.0  # in standardised units
CDF_STEP_MIN = 1e-13


class MaxEntError(RuntimeError):
    """Fitting failed; ``lambdas`` holds the last iterate when available."""

    def __init__(self, message: str, lambdas: np.ndarray | None = None):
        super().__init__(message)
        self.lambdas = lambdas


class ExponentOverflowError(MaxEntError, OverflowError):
    pass


class InadmissibleMomentsError(MaxEntError, ValueError):
    pass


# ---------------------------------------------------------------------------
# polynomial helpers


def poly_affine(coeffs: Sequence[float], shift: float, scale: float) -> np.ndarray:
    """Coefficients of ``q(u) = p(shift + scale * u)`` given those of ``p``."""
    c = np.asarray(coeffs, dtype=float)
    K = len(c) - 1
    out = np.zeros(K + 1)
    for k in range(K + 1):
        if c[k] == 0:
            continue
        for j in range(k + 1):
            out[j] += c[k] * comb(k, j) * shift ** (k - j) * scale**j
    return out


def _horner(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    acc = np.full_like(x, coeffs[-1], dtype=float)
    for c in coeffs[-2::-1]:
        acc = acc * x + c
    return acc


def _check_support(support) -> tuple[float, float]:
    a, b = (float(v) for v in support)
    if not (np.isfinite(a) and np.isfinite(b)):
        raise ValueError("support must be bounded; truncate it first (see default_support)")
    if not a < b:
        raise ValueError(f"support must satisfy a < b, got [{a}, {b}]")
    return a, b


def default_support(m: Sequence[float], observed_max: float | None = None) -> tuple[float, float]:
    """Truncation ``[0, max(40 / rate, 1.5 * observed_max)]`` of ``[0, inf)``.

    ``rate = 1 / m[1]`` is an exponential-rate guess from the mean.
    """
    m = np.asarray(m, dtype=float)
    if len(m) < 2 or not m[1] > 0:
        raise ValueError("default support needs a positive mean m[1]")
    b = 40.0 * m[1] / m[0]
    if observed_max is not None:
        b = max(b, 1.5 * float(observed_max))
    return 0.0, b


# ---------------------------------------------------------------------------
# fitted density


@dataclass(frozen=True)
class MaxEntDensity:
    """``g(x) = exp(-sum_k lambdas[k] x^k)`` on ``support``.

    ``center``, ``scale`` and ``theta`` carry the same density in the
    standardised coordinate ``u = (x - center) / scale``, where it reads
    ``exp(-sum_k theta[k] u^k) / scale``. Evaluation goes through this form,
    which is far better conditioned than the monomial one.
    """

    lambdas: np.ndarray
    support: tuple[float, float]
    center: float = 0.0
    scale: float = 1.0
    theta: np.ndarray | None = None
    iterations: int = 0
    grad_norm: float = 0.0
    tail_mass: float | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "support", _check_support(self.support))
        if self.theta is None:
            theta = poly_affine(lam, self.center, self.scale)
            theta[0] -= np.log(self.scale)
            object.__setattr__(self, "theta", theta)
        else:
            object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))

    @property
    def K(self) -> int:
        return len(self.lambdas) - 1

    @property
    def u_support(self) -> tuple[float, float]:
        a, b = self.support
        return (a - self.center) / self.scale, (b - self.center) / self.scale

    def _u_density(self, u: np.ndarray) -> np.ndarray:
        return np.exp(-_horner(self.theta, u))

    def pdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        a, b = self.support
        u = (x - self.center) / self.scale
        with np.errstate(over="ignore"):
            val = self._u_density(u) / self.scale
        return np.where((x >= a) & (x <= b), val, 0.0)

    def moments(self, K: int | None = None) -> np.ndarray:
        """Raw moments ``int x^k g`` for ``k = 0..K`` by quadrature."""
        K = self.K if K is None else int(K)
        c, s = self.center, self.scale
        ua, ub = self.u_support

        def f(u):
            x = c + s * u
            return x[:, None] ** np.arange(K + 1)[None, :] * self._u_density(u)[:, None]

        return integrate(f, ua, ub, n_init=_initial_panels(ua, ub))

    def moment(self, k: int) -> float:
        return float(self.moments(k)[k])

    def entropy(self) -> float:
        """Differential entropy ``-int g log g``."""
        ua, ub = self.u_support
        s = self.scale

        def f(u):
            h = self._u_density(u)
            return (h * (_horner(self.theta, u) + np.log(s)))[:, None]

        return float(integrate(f, ua, ub, n_init=_initial_panels(ua, ub))[0])

    def _inverse_cdf(self):
        if "ppf" not in self._cache:
            ua, ub = self.u_support
            lo, hi = max(ua, -SAMPLE_HALF_WIDTH), min(ub, SAMPLE_HALF_WIDTH)
            if not lo < hi:
                lo, hi = ua, ub
            edges = np.linspace(lo, hi, SAMPLE_PANELS + 1)
            mass = np.clip(panel_masses(self._u_density, edges), 0.0, None)
            cdf = np.concatenate([[0.0], np.cumsum(mass)])
            total = cdf[-1]
            if not total > 0:
                raise MaxEntError("density has no mass on its support")
            # panels with negligible mass would give near-infinite slopes
            keep = np.concatenate([[True], np.diff(cdf) > CDF_STEP_MIN * total])
            x = self.center + self.scale * edges[keep]
            cdf = cdf[keep]
            self._cache["ppf"] = scipy.interpolate.PchipInterpolator(cdf / cdf[-1], x)
        return self._cache["ppf"]

    def ppf(self, q) -> np.ndarray:
        """Inverse CDF from the tabulated, monotone-interpolated CDF."""
        a, b = self.support
        return np.clip(self._inverse_cdf()(np.asarray(q, dtype=float)), a, b)

    def to_record(self) -> str:
        lines = [
            f"K {self.K}",
            f"support {format_float(self.support[0])} {format_float(self.support[1])}",
            "lambdas " + " ".join(format_float(v) for v in self.lambdas),
            f"center {format_float(self.center)}",
            f"scale {format_float(self.scale)}",
            "theta " + " ".join(format_float(v) for v in self.theta),
            f"iterations {self.iterations}",
            f"grad_norm {format_float(self.grad_norm)}",
        ]
        if self.tail_mass is not None:
            lines.append(f"tail_mass {format_float(self.tail_mass)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_record(cls, text: str) -> "MaxEntDensity":
        fields = {}
        for line in text.splitlines():
            parts = line.split()
            if parts:
                fields[parts[0]] = parts[1:]
        try:
            lambdas = np.array([float(v) for v in fields["lambdas"]])
            support = tuple(float(v) for v in fields["support"])
        except KeyError as exc:
            raise ValueError(f"density record lacks field {exc}") from None
        if "K" in fields and int(fields["K"][0]) != len(lambdas) - 1:
            raise ValueError("density record: K does not match the number of lambdas")
        kw = {}
        if "theta" in fields:
            kw = dict(
                center=float(fields["center"][0]),
                scale=float(fields["scale"][0]),
                theta=np.array([float(v) for v in fields["theta"]]),
            )
        if "iterations" in fields:
            kw["iterations"] = int(fields["iterations"][0])
        if "grad_norm" in fields:
            kw["grad_norm"] = float(fields["grad_norm"][0])
        if "tail_mass" in fields:
            kw["tail_mass"] = float(fields["tail_mass"][0])
        return cls(lambdas, support, **kw)

    def density_table(self, n: int = 512) -> np.ndarray:
        a, b = self.support
        x = np.linspace(a, b, n)
        return np.column_stack([x, self.pdf(x)])


def sample_density(g: MaxEntDensity, rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` draws by inverse-CDF sampling; deterministic for a fixed seed."""
    return g.ppf(rng.random(int(n)))


# ---------------------------------------------------------------------------
# continuous dual


def _initial_panels(a: float, b: float) -> int:
    # at most about two standardised units per starting panel
    return int(np.clip(np.ceil((b - a) / 2.0), 8, 4096))


def _exp_neg(poly: np.ndarray, x: np.ndarray, strict: bool) -> np.ndarray:
    e = -_horner(poly, x)
    if np.max(e) > EXP_LIMIT:
        if strict:
            raise ExponentOverflowError(
                f"exponent reaches {np.max(e):.4g} > {EXP_LIMIT:g}; rescale the support "
                "(e.g. to [0, 1]) or the coefficients",
                np.asarray(poly),
            )
        raise FloatingPointError
    return np.exp(e)


def _dual_parts(lambdas, m, a, b, order: int, strict: bool, n_init: int):
    """Objective and moments ``int x^j exp(-p)`` for ``j <= order``."""
    lam = np.asarray(lambdas, dtype=float)
    powers = np.arange(order + 1)

    def f(x):
        w = _exp_neg(lam, x, strict)
        with np.errstate(over="ignore", invalid="ignore"):
            vals = x[:, None] ** powers[None, :] * w[:, None]
        if not np.all(np.isfinite(vals)):
            if strict:
                raise ExponentOverflowError("integrand overflows; rescale the support", np.asarray(lam))
            raise FloatingPointError
        return vals

    mom = integrate(f, a, b, n_init=n_init)
    obj = float(lam @ m + mom[0] - m[0])
    return obj, mom


def _prepare(lambdas, m, support):
    a, b = _check_support(support)
    m = np.asarray(m, dtype=float)
    lam = np.asarray(lambdas, dtype=float)
    if m.ndim != 1 or lam.shape != m.shape:
        raise ValueError(f"lambdas and m must have equal length, got {lam.shape} and {m.shape}")
    return lam, m, a, b


def dual_objective(lambdas, m, support) -> float:
    """``sum_k lambda_k m_k + int_a^b exp(-sum_k lambda_k x^k) dx - m_0``.

    Raises
    ------
    ExponentOverflowError
        If the exponent exceeds 700 anywhere on the quadrature grid.
    """
    lam, m, a, b = _prepare(lambdas, m, support)
    obj, _ = _dual_parts(lam, m, a, b, 0, True, 16)
    return obj


def dual_gradient(lambdas, m, support) -> np.ndarray:
    """``m_k - int x^k exp(-sum_j lambda_j x^j) dx`` for ``k = 0..K``."""
    lam, m, a, b = _prepare(lambdas, m, support)
    _, mom = _dual_parts(lam, m, a, b, len(m) - 1, True, 16)
    return m - mom


def _standardisation(m: np.ndarray, a: float, b: float) -> tuple[float, float]:
    half = 0.5 * (b - a)
    if len(m) >= 3 and m[0] > 0:
        mean = m[1] / m[0]
        var = m[2] / m[0] - mean * mean
        if var > 0 and a <= mean <= b:
            return mean, min(np.sqrt(var), half)
    return a + half, half


def _moment_map(K: int, c: float, s: float) -> np.ndarray:
    """``T`` with ``x^k = sum_j T[k, j] u^j`` for ``x = c + s u``."""
    T = np.zeros((K + 1, K + 1))
    for k in range(K + 1):
        for j in range(k + 1):
            T[k, j] = comb(k, j) * c ** (k - j) * s**j
    return T


def _fit_result_error(res: OptimResult, lam_x: np.ndarray, what: str) -> MaxEntError:
    return MaxEntError(
        f"{what}: {res.message} after {res.iterations} iterations "
        f"(gradient norm {res.grad_norm:.3g}); last lambdas "
        + " ".join(format_float(v) for v in lam_x),
        lam_x,
    )


def fit_maxent(
    m: Sequence[float],
    support,
    init: Sequence[float] | str | None = None,
    max_iter: int = 500,
    grad_tol: float = 1e-8,
    hankel_tol: float = TOL_HANKEL_ESTIMATED,
    truncated: bool = False,
) -> MaxEntDensity:
    """Maximum-entropy density on ``support`` with moments ``m[0..K]``.

    Parameters
    ----------
    m : sequence of float
        Target moments, ``m[0]`` first (normally 1).
    support : (a, b)
        Bounded interval.
    init : sequence of float or {"uniform", "gaussian"}, optional
        Starting coefficients in the coordinate ``t = (x - a) / (b - a)``
        on ``[0, 1]``; the default 0 is the uniform density. ``"gaussian"``
        starts from the normal density with the target mean and variance,
        which is much closer for narrow targets on wide supports.
    max_iter, grad_tol
        Quasi-Newton iteration cap and the sup-norm gradient tolerance.
        The gradient is checked both in the working coordinate and in
        ``x``.
    hankel_tol : float
        Tolerance of the admissibility checks on ``m``: the Hankel check,
        then the check that some distribution on ``support`` has these
        moments (see :func:`wrdpg.model.moment_space_check`).
    truncated : bool
        Set when ``support`` truncates an unbounded one. The mass in the top
        5% of the interval must then be below ``1e-8``.

    Raises
    ------
    InadmissibleMomentsError, MaxEntError
    """
    a, b = _check_support(support)
    m = np.asarray(m, dtype=float)
    if m.ndim != 1 or m.size == 0 or not np.all(np.isfinite(m)):
        raise ValueError("m must be a non-empty finite 1-d sequence")
    K = len(m) - 1
    if not hankel_psd_check(m, hankel_tol):
        raise InadmissibleMomentsError(
            f"moment sequence is not admissible: m[0]={m[0]:.6g}, "
            f"minimum Hankel eigenvalue {min_hankel_eigenvalue(m):.3g} (tolerance {hankel_tol:g})"
        )
    c, s = _standardisation(m, a, b)
    ua, ub = (a - c) / s, (b - c) / s
    mu = affine_moments(m, c, s)
    if not moment_space_check(mu, (ua, ub), hankel_tol):
        raise InadmissibleMomentsError(
            f"no distribution on [{a:.6g}, {b:.6g}] has these moments "
            f"(minimum localizing eigenvalue {min_moment_eigenvalue(mu, (ua, ub)):.3g}, standardised)"
        )
    T = _moment_map(K, c, s)
    n_init = _initial_panels(ua, ub)

    def fun(theta, need_hess):
        order = 2 * K if need_hess else K
        try:
            obj, mom = _dual_parts(theta, mu, ua, ub, order, False, n_init)
        except (FloatingPointError, QuadratureError):
            return np.inf, np.full(K + 1, np.nan), None
        grad = mu - mom[: K + 1]
        H = None
        if need_hess:
            H = np.array([[mom[i + j] for j in range(K + 1)] for i in range(K + 1)])
        return obj, grad, H

    # Standardised moments carry the rounding error of the raw ones,
    # amplified by (|c| / s)^k; the working gradient is only judged down
    # to that floor. The x-gradient (the dual as stated) must meet grad_tol.
    floor = np.array(
        [64 * np.finfo(float).eps * sum(comb(k, j) * abs(m[j]) * abs(c) ** (k - j) for j in range(k + 1)) / s**k
         for k in range(K + 1)]
    )
    weight = grad_tol / np.maximum(grad_tol, floor)

    def norm(grad):
        return max(float(np.max(np.abs(T @ grad))), float(np.max(np.abs(grad) * weight)))

    theta0 = _starting_point(init, K, a, b, c, s)
    res = bfgs(fun, theta0, grad_tol=grad_tol, max_iter=max_iter, norm=norm)
    lam_x = _theta_to_lambdas(res.x, c, s)
    if not res.converged:
        raise _fit_result_error(res, lam_x, "max-entropy fit did not converge")
    dens = MaxEntDensity(lam_x, (a, b), c, s, res.x.copy(), res.iterations, res.grad_norm)
    if truncated:
        tail = _tail_mass(dens)
        dens = MaxEntDensity(lam_x, (a, b), c, s, res.x.copy(), res.iterations, res.grad_norm, tail)
        if not tail < TAIL_LIMIT:
            raise MaxEntError(
                f"truncated support [{a:.6g}, {b:.6g}] leaves tail mass {tail:.3g} >= {TAIL_LIMIT:g}; "
                "widen the support",
                lam_x,
            )
    return dens


def _starting_point(init, K, a, b, c, s) -> np.ndarray:
    if isinstance(init, str):
        if init == "uniform":
            init = None
        elif init == "gaussian":
            if K < 2:
                raise ValueError("a Gaussian start needs K >= 2")
            theta = np.zeros(K + 1)
            theta[0], theta[2] = 0.5 * np.log(2 * np.pi), 0.5
            return theta
        else:
            raise ValueError(f"unknown init {init!r}")
    # coefficients in t = (x - a) / (b - a), mapped to the u-density
    lam_t = np.zeros(K + 1) if init is None else np.asarray(init, dtype=float)
    if lam_t.shape != (K + 1,):
        raise ValueError(f"init must have {K + 1} entries, got {lam_t.shape}")
    width = b - a
    theta = poly_affine(lam_t, (c - a) / width, s / width)
    theta[0] += np.log(width) - np.log(s)
    return theta


def _theta_to_lambdas(theta: np.ndarray, c: float, s: float) -> np.ndarray:
    q = np.array(theta, dtype=float)
    q[0] += np.log(s)
    return poly_affine(q, -c / s, 1.0 / s)


def _tail_mass(g: MaxEntDensity) -> float:
    a, b = g.support
    lo = b - 0.05 * (b - a)
    ua, ub = (lo - g.center) / g.scale, (b - g.center) / g.scale
    return float(integrate(lambda u: g._u_density(u)[:, None], ua, ub, n_init=_initial_panels(ua, ub))[0])


def fit_restarts(
    m: Sequence[float], support, n_restarts: int, rng: np.random.Generator, **opts
) -> list[MaxEntDensity | MaxEntError]:
    """Independent fits from uniform random starts in ``[-1, 1]^(K+1)``.

    Failed runs are returned as their exception instead of raising.
    """
    K = len(m) - 1
    out: list[MaxEntDensity | MaxEntError] = []
    for _ in range(int(n_restarts)):
        init = rng.uniform(-1.0, 1.0, K + 1)
        try:
            out.append(fit_maxent(m, support, init=init, **opts))
        except MaxEntError as exc:
            out.append(exc)
    return out


# ---------------------------------------------------------------------------
# discrete dual


def maxent_discrete(
    m: Sequence[float], values: Sequence[float], max_iter: int = 500, grad_tol: float = 1e-10
) -> DiscretePmf:
    """Maximum-entropy pmf ``p_r = exp(-sum_k lambda_k v_r^k)`` on ``values``.

    Minimises ``sum_k lambda_k m_k + sum_r exp(-sum_k lambda_k v_r^k) - m_0``
    with the support mapped onto ``[-1, 1]``. Needs ``K <= R``.
    """
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="stable")
    v = v[order]
    if v.ndim != 1 or v.size == 0 or np.any(np.diff(v) == 0):
        raise ValueError("values must be distinct")
    m = np.asarray(m, dtype=float)
    K, R = len(m) - 1, len(v) - 1
    if K > R:
        raise ValueError(f"K={K} exceeds R={R}; use chebyshev_vandermonde_solve instead")
    if R == 0:
        return DiscretePmf(v, np.array([m[0]]), 0.0)
    c, s = 0.5 * (v[0] + v[-1]), 0.5 * (v[-1] - v[0])
    vs = (v - c) / s
    ms = affine_moments(m, c, s)
    depth = moment_depth(v, m)
    if not depth > -TOL_NEG:
        raise InadmissibleMomentsError(
            f"no pmf on the {R + 1} support values has these moments (moment depth {depth:.3g})"
        )
    P = vs[None, :] ** np.arange(2 * K + 1)[:, None]

    def fun(lam, need_hess):
        e = -(lam @ P[: K + 1])
        if np.max(e) > EXP_LIMIT:
            return np.inf, np.full(K + 1, np.nan), None
        p = np.exp(e)
        mom = P @ p
        grad = ms - mom[: K + 1]
        H = None
        if need_hess:
            H = np.array([[mom[i + j] for j in range(K + 1)] for i in range(K + 1)])
        return float(lam @ ms + p.sum() - ms[0]), grad, H

    res = bfgs(fun, np.zeros(K + 1), grad_tol=grad_tol, max_iter=max_iter)
    if not res.converged:
        raise MaxEntError(
            f"discrete max-entropy fit did not converge: {res.message} "
            f"(gradient norm {res.grad_norm:.3g})",
            res.x,
        )
    p = np.exp(-(res.x @ P[: K + 1]))
    V = v[None, :] ** np.arange(K + 1)[:, None]
    return DiscretePmf(v, p, float(np.linalg.norm(V @ p - m)))


# ---------------------------------------------------------------------------
# text I/O


def load_moments(source: IO[str] | str) -> np.ndarray:
    """One real per line; blank lines and ``#`` comments are skipped."""
    text = source if isinstance(source, str) else source.read()
    vals = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            vals.append(float(line))
    if not vals:
        raise ValueError("moments file is empty")
    return np.array(vals)


__all__ = [
    "EXP_LIMIT",
    "QUAD_RTOL",
    "ExponentOverflowError",
    "InadmissibleMomentsError",
    "MaxEntDensity",
    "MaxEntError",
    "default_support",
    "dual_gradient",
    "dual_objective",
    "fit_maxent",
    "fit_restarts",
    "load_moments",
    "maxent_discrete",
    "poly_affine",
    "sample_density",
]
