"""Per-edge weight models fitted from moment sequences, and graph sampling.

Pairs are always handled in lexicographic order ``(0,1), (0,2), ...,
(n-2,n-1)``; pair ``t`` in that order is called "pair index ``t``".

Random numbers come from a Philox counter-based generator. Each pair owns
one Philox block (four 64-bit words, of which two uniforms are used), so
with an integer seed the draws for any range of pairs can be regenerated
on their own with :func:`pair_uniforms`.
"""

from __future__ import annotations

import concurrent.futures
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .discrete import DiscretePmf, InfeasibleError, chebyshev_vandermonde_solve, depth_mixing_weight, moment_depth
from .graph import WeightedGraph, format_float, indicator_matrix
from .maxent import MaxEntDensity, MaxEntError, default_support, fit_maxent, maxent_discrete
from .model import LatentSequence, min_moment_eigenvalue, pair_moments
from .spectral import NegativeEigenvalueError, ase, embed_moments

EPS_P = 1e-6
ABSENT_LIMIT = 1e-3
KINDS = ("discrete", "continuous", "mixed")


class ReplicationError(RuntimeError):
    """A pipeline stage failed; ``stage`` and ``pair`` say where."""

    def __init__(self, stage: str, message: str, pair: tuple[int, int] | None = None):
        where = f" for pair {pair}" if pair is not None else ""
        super().__init__(f"stage '{stage}' failed{where}: {message}")
        self.stage = stage
        self.pair = pair


# ---------------------------------------------------------------------------
# random streams


def make_rng(seed) -> np.random.Generator:
    """Philox generator from an integer seed (generators pass through)."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        raise ValueError("an explicit seed is required")
    return np.random.Generator(np.random.Philox(int(seed)))


def _draw_pairs(rng: np.random.Generator, n_pairs: int) -> np.ndarray:
    # one Philox block per pair; the second pair of words is discarded
    return rng.random((n_pairs, 4))[:, :2]


def pair_uniforms(seed: int, start: int, stop: int) -> np.ndarray:
    """Uniforms of pair indices ``start..stop-1`` for a fresh integer seed.

    Equal to rows ``start:stop`` of what :func:`generate_graph` draws for
    the first graph generated from ``seed``.
    """
    bitgen = np.random.Philox(int(seed))
    bitgen.advance(int(start))
    return _draw_pairs(np.random.Generator(bitgen), int(stop) - int(start))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("WRDPG_THREADS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# edge models


@dataclass(frozen=True)
class EdgeWeightModel:
    """Weight law of one edge class.

    ``kind`` is ``"discrete"`` (``pmf``; the value 0 means no edge),
    ``"continuous"`` (``density``; the edge is always present) or
    ``"mixed"`` (absent with probability ``p0``, else ``density``). A
    mixed model with ``density=None`` and ``p0=1`` is always absent.
    """

    kind: str
    pmf: DiscretePmf | None = None
    density: MaxEntDensity | None = None
    p0: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == "discrete" and self.pmf is None:
            raise ValueError("discrete model needs a pmf")
        if self.kind == "continuous" and self.density is None:
            raise ValueError("continuous model needs a density")
        if not 0.0 <= self.p0 <= 1.0:
            raise ValueError(f"p0 must lie in [0, 1], got {self.p0}")

    @property
    def always_absent(self) -> bool:
        return self.kind == "mixed" and self.density is None

    def moments(self, K: int) -> np.ndarray:
        """Raw moments ``k = 0..K`` of the model (point mass included)."""
        if self.kind == "discrete":
            return self.pmf.moments(K)
        if self.always_absent:
            return np.r_[1.0, np.zeros(K)]
        mom = self.density.moments(K)
        if self.kind == "mixed":
            mom = (1.0 - self.p0) * mom
            mom[0] += self.p0
        return mom

    def sample(self, u: np.ndarray) -> np.ndarray:
        """Weights from uniforms ``u`` of shape ``(n, 2)``.

        Column 0 decides presence (mixed) or picks the atom (discrete);
        column 1 drives the inverse CDF of the continuous part.
        """
        u = np.atleast_2d(u)
        if self.kind == "discrete":
            p = self.pmf.sampling_probs()
            cdf = np.cumsum(p)
            cdf[-1] = 1.0
            idx = np.searchsorted(cdf, u[:, 0], side="right")
            return self.pmf.values[np.minimum(idx, len(p) - 1)]
        if self.always_absent:
            return np.zeros(len(u))
        w = self.density.ppf(u[:, 1])
        if self.kind == "mixed":
            w = np.where(u[:, 0] < self.p0, 0.0, w)
        return w

    def to_record(self) -> str:
        lines = [f"kind {self.kind}"]
        if self.kind == "discrete":
            lines.append("values " + " ".join(format_float(v) for v in self.pmf.values))
            lines.append("probs " + " ".join(format_float(v) for v in self.pmf.probs))
            lines.append(f"residual {format_float(self.pmf.residual)}")
            return "\n".join(lines) + "\n"
        if self.kind == "mixed":
            lines.append(f"p0 {format_float(self.p0)}")
        if self.density is None:
            lines.append("absent")
            return "\n".join(lines) + "\n"
        return "\n".join(lines) + "\n" + self.density.to_record()

    @classmethod
    def from_record(cls, text: str) -> "EdgeWeightModel":
        fields = {}
        for line in text.splitlines():
            parts = line.split()
            if parts:
                fields[parts[0]] = parts[1:]
        kind = fields["kind"][0]
        if kind == "discrete":
            pmf = DiscretePmf(
                np.array([float(v) for v in fields["values"]]),
                np.array([float(v) for v in fields["probs"]]),
                float(fields.get("residual", ["0"])[0]),
            )
            return cls(kind, pmf=pmf)
        p0 = float(fields["p0"][0]) if "p0" in fields else 0.0
        if "absent" in fields:
            return cls(kind, p0=p0)
        return cls(kind, density=MaxEntDensity.from_record(text), p0=p0)


def _fit_density(h, support, observed_max, init, **opts) -> MaxEntDensity:
    truncated = support is None
    if truncated:
        support = default_support(h, observed_max)
    if init is not None:
        return fit_maxent(h, support, init=init, truncated=truncated, **opts)
    if len(h) >= 3:
        try:
            return fit_maxent(h, support, init="gaussian", truncated=truncated, **opts)
        except MaxEntError:
            pass
    return fit_maxent(h, support, truncated=truncated, **opts)


def fit_edge_model(
    m: Sequence[float],
    p0: float = 0.0,
    kind: str = "continuous",
    values: Sequence[float] | None = None,
    support: tuple[float, float] | None = None,
    observed_max: float | None = None,
    init=None,
    residual_tol: float = 1e-6,
    **maxent_opts,
) -> EdgeWeightModel:
    """Fit the weight law of one edge from its moments ``m[0..K]``.

    Parameters
    ----------
    m : sequence of float
        Moments including the point mass at zero, ``m[0] = 1``.
    p0 : float
        Probability of no edge; only used by ``kind="mixed"``.
    kind : {"discrete", "continuous", "mixed"}
        ``discrete`` recovers a nonnegative pmf on ``values`` in the
        Chebyshev basis (max-entropy pmf if there are fewer moments than
        atoms). ``continuous`` fits a max-entropy density to ``m``.
        ``mixed`` fits one to ``(1, m[1]/(1-p0), ..., m[K]/(1-p0))`` and
        keeps the point mass ``p0``; when ``1 - p0 < 1e-3`` the edge is
        modelled as always absent.
    values : sequence of float
        Support of the discrete kind.
    support : (a, b), optional
        Interval of the density. Defaults to a truncation of
        ``[0, inf)`` (see :func:`wrdpg.maxent.default_support`).
    observed_max : float, optional
        Largest observed weight, used by the default truncation.
    init
        Optimiser start; by default a Gaussian start is tried first, then
        the uniform one.
    residual_tol : float
        Largest relative residual accepted by the nonnegative discrete solve.
    """
    m = np.asarray(m, dtype=float)
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    if kind == "discrete":
        if values is None:
            raise ValueError("discrete kind needs support values")
        if len(m) < len(values):
            return EdgeWeightModel(kind, pmf=maxent_discrete(m, values))
        return EdgeWeightModel(kind, pmf=chebyshev_vandermonde_solve(values, m, nonneg=True, residual_tol=residual_tol))
    if kind == "continuous":
        return EdgeWeightModel(kind, density=_fit_density(m, support, observed_max, init, **maxent_opts))
    if not 0.0 <= p0 < 1.0:
        raise ValueError(f"mixed kind needs p0 in [0, 1), got {p0}")
    if 1.0 - p0 < ABSENT_LIMIT:
        return EdgeWeightModel(kind, p0=1.0)
    h = np.r_[1.0, m[1:] / (1.0 - p0)]
    return EdgeWeightModel(kind, density=_fit_density(h, support, observed_max, init, **maxent_opts), p0=float(p0))


# ---------------------------------------------------------------------------
# signature quantisation


def quantize(x: np.ndarray, digits: int) -> tuple[np.ndarray, np.ndarray]:
    """Integer keys and rounded values at ``digits`` significant digits.

    Keys are exact integer pairs (mantissa, exponent), so grouping does
    not depend on float comparisons.
    """
    x = np.asarray(x, dtype=float)
    nz = x != 0
    exp = np.zeros(x.shape, dtype=np.int64)
    exp[nz] = np.floor(np.log10(np.abs(x[nz]))).astype(np.int64)
    mant = np.rint(x * 10.0 ** (digits - 1 - exp)).astype(np.int64)
    # rounding may carry into a new decade (9.99 -> 10.0)
    carry = np.abs(mant) >= 10**digits
    mant[carry] = np.rint(mant[carry] / 10).astype(np.int64)
    exp[carry] += 1
    keys = np.concatenate([mant, exp], axis=-1)
    values = mant * 10.0 ** (exp - digits + 1)
    return keys, values


def _group(keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    uniq, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    return first, inverse.reshape(-1)


# ---------------------------------------------------------------------------
# admissibility repair (opt-in)


def shrink_to_admissible(
    M: np.ndarray,
    reference: np.ndarray,
    margin: float = 0.1,
    support: tuple[float, float] = (0.0, np.inf),
    values: Sequence[float] | None = None,
    steps: int = 50,
) -> tuple[np.ndarray, np.ndarray]:
    """Pull failing rows of ``M`` toward an admissible ``reference``.

    Admissibility is scored by :func:`wrdpg.model.min_moment_eigenvalue`
    on ``support``, or by :func:`wrdpg.discrete.moment_depth` when the
    finite support ``values`` is given. A row passes when its score is at
    least ``margin`` times that of ``reference``. Failing rows become
    ``(1 - t) m + t reference`` with the smallest passing ``t``, found by
    bisection (one linear programme for ``values``); the passing set of
    ``t`` is an interval ending at 1 because both scores are concave in ``m``.

    Returns the repaired array and the ``t`` used per row (0 = untouched).
    """
    if values is None:
        score = lambda m: min_moment_eigenvalue(m, support)
    else:
        score = lambda m: moment_depth(values, m)
    ref = np.asarray(reference, dtype=float)
    ref_score = score(ref)
    if not ref_score > 0:
        raise ValueError("reference moment sequence is not strictly admissible")
    floor = margin * ref_score
    out = np.array(M, dtype=float)
    shift = np.zeros(len(out))
    for r in range(len(out)):
        m = out[r]
        if score(m) >= floor:
            continue
        if values is not None:
            # the depth constraint is linear in (p, t): solve for t directly
            hi = depth_mixing_weight(values, m, ref, floor)
            out[r] = (1 - hi) * m + hi * ref
            shift[r] = hi
            continue
        lo, hi = 0.0, 1.0
        for _ in range(steps):
            mid = 0.5 * (lo + hi)
            if score((1 - mid) * m + mid * ref) >= floor:
                hi = mid
            else:
                lo = mid
        out[r] = (1 - hi) * m + hi * ref
        shift[r] = hi
    return out, shift


# ---------------------------------------------------------------------------
# fitted graph model


@dataclass(frozen=True)
class FittedGraphModel:
    """Edge classes of a graph and one weight model per class.

    ``pair_class[t]`` is the class of pair index ``t``.
    """

    n_nodes: int
    pair_class: np.ndarray
    models: tuple[EdgeWeightModel, ...]
    kind: str = "continuous"
    _groups: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        pc = np.asarray(self.pair_class, dtype=np.int64)
        n = int(self.n_nodes)
        if pc.shape != (n * (n - 1) // 2,):
            raise ValueError(f"pair_class must list all {n * (n - 1) // 2} pairs")
        if pc.size and (pc.min() < 0 or pc.max() >= len(self.models)):
            raise ValueError("pair_class refers to a missing model")
        object.__setattr__(self, "pair_class", pc)
        object.__setattr__(self, "models", tuple(self.models))

    @property
    def n_pairs(self) -> int:
        return len(self.pair_class)

    def class_of(self, i: int, j: int) -> int:
        i, j = min(i, j), max(i, j)
        if i == j or not 0 <= i < j < self.n_nodes:
            raise IndexError(f"no pair ({i}, {j})")
        n = self.n_nodes
        t = i * n - i * (i + 1) // 2 + (j - i - 1)
        return int(self.pair_class[t])

    def to_text(self) -> str:
        out = [
            f"n_nodes {self.n_nodes}",
            f"kind {self.kind}",
            f"classes {len(self.models)}",
            "pair_class " + " ".join(str(c) for c in self.pair_class),
        ]
        text = "\n".join(out) + "\n"
        for c, mdl in enumerate(self.models):
            text += f"[class {c}]\n" + mdl.to_record()
        return text

    @classmethod
    def from_text(cls, text: str) -> "FittedGraphModel":
        head, *blocks = text.split("[class ")
        fields = {}
        for line in head.splitlines():
            parts = line.split()
            if parts:
                fields[parts[0]] = parts[1:]
        models = []
        for c, block in enumerate(blocks):
            idx, _, body = block.partition("]\n")
            if int(idx) != c:
                raise ValueError(f"class records out of order at {idx}")
            models.append(EdgeWeightModel.from_record(body))
        return cls(
            int(fields["n_nodes"][0]),
            np.array([int(v) for v in fields.get("pair_class", [])], dtype=np.int64),
            tuple(models),
            fields["kind"][0],
        )


def _pair_of(t: int, n: int) -> tuple[int, int]:
    iu, ju = np.triu_indices(n, 1)
    return int(iu[t]), int(ju[t])


def fit_graph_model(
    moments: np.ndarray,
    n_nodes: int,
    kind: str,
    p0: np.ndarray | None = None,
    values: Sequence[float] | None = None,
    support: tuple[float, float] | None = None,
    observed_max: float | None = None,
    signature_digits: int = 10,
    p0_digits: int | None = None,
    n_jobs: int | None = None,
    inadmissible: str = "error",
    **fit_opts,
) -> FittedGraphModel:
    """Fit one model per distinct moment signature.

    Parameters
    ----------
    moments : ndarray of shape (n_pairs, K + 1)
        Pair moment sequences in pair-index order.
    p0 : ndarray of shape (n_pairs,), optional
        Non-edge probabilities, required for ``kind="mixed"``.
    signature_digits : int
        Significant digits kept in the moment signature; pairs with equal
        signatures share one fit, made on the rounded moments.
    p0_digits : int, optional
        Digits kept for ``p0`` (default ``signature_digits``). For the
        mixed kind the density is fitted per rescaled-moment signature and
        shared across ``p0`` values.
    n_jobs : int, optional
        Worker threads for the fits (default from ``WRDPG_THREADS``).
    inadmissible : {"error", "shrink"}
        Handling of sequences that no distribution on the support can have
        (typical for per-pair estimates). ``"error"`` aborts naming the
        pair; ``"shrink"`` applies :func:`shrink_to_admissible` to the
        rounded class sequences, toward the pooled mean sequence. The
        support is ``support`` for densities (``[0, 1.5 observed_max]``,
        which every default truncation contains, when not given) and the
        set ``values`` for the discrete kind; discrete classes solved by
        the Vandermonde system are never touched.
    """
    M = np.asarray(moments, dtype=float)
    n_pairs = n_nodes * (n_nodes - 1) // 2
    if M.ndim != 2 or M.shape[0] != n_pairs:
        raise ValueError(f"moments must have shape ({n_pairs}, K+1), got {M.shape}")
    if not np.all(np.isfinite(M)):
        bad = int(np.argmax(~np.all(np.isfinite(M), axis=1)))
        raise ReplicationError("moments", "non-finite moment", _pair_of(bad, n_nodes))
    p0_digits = signature_digits if p0_digits is None else p0_digits
    n_jobs = n_jobs or _threads()
    if inadmissible not in ("error", "shrink"):
        raise ValueError(f"inadmissible must be 'error' or 'shrink', got {inadmissible!r}")
    repair = inadmissible == "shrink"
    if kind == "discrete":
        if values is None:
            raise ValueError("discrete kind needs support values")
        # only the max-entropy path (fewer moments than atoms) can be infeasible
        repair = repair and M.shape[1] < len(values)
        region, atoms = None, values
    elif support is not None:
        region, atoms = tuple(support), None
    else:
        # every default truncation contains [0, 1.5 * observed_max]
        region, atoms = (0.0, np.inf if observed_max is None else 1.5 * observed_max), None

    def repaired(S: np.ndarray, rows: np.ndarray, ref: np.ndarray) -> np.ndarray:
        try:
            fixed, _ = shrink_to_admissible(S[rows], ref, support=region, values=atoms)
        except ValueError as exc:
            raise ReplicationError("moments", f"cannot repair: {exc}") from exc
        S = S.copy()
        S[rows] = fixed
        return S

    if kind == "mixed":
        if p0 is None:
            raise ValueError("mixed kind needs p0")
        p0 = np.asarray(p0, dtype=float)
        p0_keys, p0_vals = quantize(p0[:, None], p0_digits)
        absent = 1.0 - p0 < ABSENT_LIMIT
        h = M[:, 1:] / np.where(absent, 1.0, 1.0 - p0)[:, None]
        h_keys, h_vals = quantize(h, signature_digits)
        h_keys[absent] = 0  # one shared "absent" signature
        d_first, d_inv = _group(np.column_stack([absent.astype(np.int64), h_keys]))
        if repair and np.any(~absent):
            # repair the rounded class representatives, pulling toward the pooled mean
            rows = d_first[~absent[d_first]]
            ref = np.r_[1.0, h[~absent].mean(axis=0)]
            h_vals = repaired(np.column_stack([np.ones(len(h)), h_vals]), rows, ref)[:, 1:]
    else:
        keys, vals = quantize(M, signature_digits)
        d_first, d_inv = _group(keys)
        if repair:
            vals = repaired(vals, d_first, M.mean(axis=0))

    def fit_one(t: int):
        try:
            if kind == "mixed":
                if absent[t]:
                    return None
                return fit_edge_model(
                    np.r_[1.0, h_vals[t]], 0.0, "continuous", values, support, observed_max, **fit_opts
                ).density
            return fit_edge_model(vals[t], 0.0, kind, values, support, observed_max, **fit_opts)
        except (MaxEntError, InfeasibleError, np.linalg.LinAlgError, ValueError) as exc:
            raise ReplicationError("fit", str(exc), _pair_of(int(t), n_nodes)) from exc

    if n_jobs > 1 and len(d_first) > 1:
        with concurrent.futures.ThreadPoolExecutor(n_jobs) as pool:
            fitted = list(pool.map(fit_one, d_first))
    else:
        fitted = [fit_one(t) for t in d_first]

    if kind != "mixed":
        return FittedGraphModel(n_nodes, d_inv, tuple(fitted), kind)

    c_first, c_inv = _group(np.column_stack([d_inv, p0_keys]))
    models = []
    for t in c_first:
        dens = fitted[d_inv[t]]
        if dens is None:
            models.append(EdgeWeightModel("mixed", p0=1.0))
        else:
            models.append(EdgeWeightModel("mixed", density=dens, p0=float(np.clip(p0_vals[t, 0], 0.0, 1.0))))
    return FittedGraphModel(n_nodes, c_inv, tuple(models), kind)


def model_from_latent(latent: LatentSequence, kind: str, p0: np.ndarray | None = None, **opts) -> FittedGraphModel:
    """Fitted model from latent positions (moments ``x_i[k] . x_j[k]``)."""
    return fit_graph_model(pair_moments(latent), latent.n_nodes, kind, p0=p0, **opts)


def generate_graph(model: FittedGraphModel, rng) -> WeightedGraph:
    """Sample one graph; every pair independently from its class model.

    ``rng`` is an integer seed or a generator from :func:`make_rng`. Pair
    index ``t`` consumes the ``t``-th block of the stream.
    """
    rng = make_rng(rng)
    n = model.n_nodes
    U = _draw_pairs(rng, model.n_pairs)
    w = np.zeros(model.n_pairs)
    if "order" not in model._groups:
        order = np.argsort(model.pair_class, kind="stable")
        bounds = np.searchsorted(model.pair_class[order], np.arange(len(model.models) + 1))
        model._groups["order"] = (order, bounds)
    order, bounds = model._groups["order"]
    for c, mdl in enumerate(model.models):
        idx = order[bounds[c] : bounds[c + 1]]
        if idx.size:
            w[idx] = mdl.sample(U[idx])
    W = np.zeros((n, n))
    iu, ju = np.triu_indices(n, 1)
    W[iu, ju] = w
    return WeightedGraph(W + W.T)


# ---------------------------------------------------------------------------
# p0 and replication


def estimate_p0(W: WeightedGraph | np.ndarray, d: int) -> np.ndarray:
    """Non-edge probabilities ``1 - clip(P_hat, eps, 1 - eps)``.

    ``P_hat = X X^T`` with ``X`` the ASE of the indicator matrix (negative
    eigenvalues clamped). The diagonal is set to 1. An indicator matrix
    with fewer than ``d`` positive eigenvalues (an empty graph, say) is an
    error.
    """
    A = indicator_matrix(W)
    emb = ase(A, d, negative_policy="clamp")
    if not np.all(emb.eigvals > 0):
        raise NegativeEigenvalueError(f"indicator matrix has fewer than {d} positive eigenvalues")
    P = emb.gram()
    p0 = 1.0 - np.clip(P, EPS_P, 1.0 - EPS_P)
    np.fill_diagonal(p0, 1.0)
    return p0


def support_from_weights(W: WeightedGraph | np.ndarray) -> np.ndarray:
    """Distinct observed weights plus 0, ascending."""
    A = W.weights if isinstance(W, WeightedGraph) else np.asarray(W, dtype=float)
    return np.unique(np.r_[0.0, A[np.triu_indices(A.shape[0], 1)]])


def fit_from_graph(
    W: WeightedGraph,
    d: int,
    K: int,
    kind: str,
    negative_policy: str = "error",
    values: Sequence[float] | None = None,
    support: tuple[float, float] | None = None,
    **opts,
) -> FittedGraphModel:
    """Embed ``W^(k)``, form pair moments, estimate ``p0`` and fit classes."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    if int(K) != K or K < 1:
        raise ValueError(f"K must be an integer >= 1, got {K}")
    n = W.n_nodes
    try:
        embs = embed_moments(W, d, K, negative_policy)
    except (NegativeEigenvalueError, np.linalg.LinAlgError, OverflowError, ValueError) as exc:
        raise ReplicationError("embed", str(exc)) from exc
    M = pair_moments(LatentSequence.from_embeddings(embs))
    p0 = None
    if kind == "mixed":
        try:
            p0 = estimate_p0(W, d)[np.triu_indices(n, 1)]
        except (NegativeEigenvalueError, np.linalg.LinAlgError, ValueError) as exc:
            raise ReplicationError("p0", str(exc)) from exc
    if kind == "discrete":
        values = support_from_weights(W) if values is None else values
        opts.setdefault("residual_tol", np.inf)
    observed_max = float(W.weights.max()) if W.weights.size else None
    return fit_graph_model(M, n, kind, p0=p0, values=values, support=support, observed_max=observed_max, **opts)


def replicate(
    W: WeightedGraph,
    d: int,
    K: int,
    kind: str,
    n_reps: int,
    rng,
    **opts,
) -> list[WeightedGraph]:
    """``n_reps`` synthetic graphs mimicking ``W``.

    See :func:`fit_from_graph` for the fitting options. Replicates are
    drawn one after another from a single stream.
    """
    if int(n_reps) != n_reps or n_reps < 1:
        raise ValueError(f"n_reps must be a positive integer, got {n_reps}")
    rng = make_rng(rng)
    model = fit_from_graph(W, d, K, kind, **opts)
    return [generate_graph(model, rng) for _ in range(int(n_reps))]
