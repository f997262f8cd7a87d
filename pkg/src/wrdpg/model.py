"""Moment sequences, weight distributions and latent positions of weighted SBMs."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import IO, Any, Sequence

import numpy as np

from .graph import WeightedGraph

TOL_HANKEL = 1e-8
TOL_HANKEL_ESTIMATED = 1e-4
TOL_PSD = 1e-10
MAX_POISSON_ORDER = 30


class ModelError(ValueError):
    """Inconsistent model specification (e.g. non-PSD block moment matrix)."""


# ---------------------------------------------------------------------------
# moment sequences


def hankel_matrix(m: Sequence[float]) -> np.ndarray:
    """Largest square Hankel matrix ``H[i, j] = m[i + j]`` that fits in ``m``."""
    m = np.asarray(m, dtype=float)
    p = (len(m) - 1) // 2
    idx = np.add.outer(np.arange(p + 1), np.arange(p + 1))
    return m[idx]


def min_hankel_eigenvalue(m: Sequence[float]) -> float:
    return float(np.linalg.eigvalsh(hankel_matrix(m))[0])


def hankel_psd_check(m: Sequence[float], tol: float = TOL_HANKEL) -> bool:
    """Whether ``m`` looks like an admissible moment sequence.

    True iff ``m[0] == 1`` (to ``tol``) and the Hankel matrix of order
    ``len(m) // 2`` has minimum eigenvalue ``>= -tol``.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 1 or m.size == 0 or not np.all(np.isfinite(m)):
        return False
    if abs(m[0] - 1.0) > tol:
        return False
    return min_hankel_eigenvalue(m) >= -tol


def localizing_matrices(m: Sequence[float], support: tuple[float, float] = (-np.inf, np.inf)) -> list[np.ndarray]:
    """Hankel-type matrices that are PSD when ``m`` are moments on ``support``.

    For each polynomial ``q`` in ``1, x - a, b - x, (x - a)(b - x)`` (those
    with finite endpoints) the matrix ``[sum_r q_r m[i + j + r]]`` of the
    largest size the sequence allows. Positive definiteness of all of them
    characterises the interior of the moment space of ``support``.
    """
    m = np.asarray(m, dtype=float)
    a, b = support
    weights = [np.array([1.0])]
    if np.isfinite(a):
        weights.append(np.array([-a, 1.0]))
    if np.isfinite(b):
        weights.append(np.array([b, -1.0]))
    if np.isfinite(a) and np.isfinite(b):
        weights.append(np.array([-a * b, a + b, -1.0]))
    K = len(m) - 1
    out = []
    for q in weights:
        p = (K - (len(q) - 1)) // 2
        if p < 0:
            continue
        idx = np.add.outer(np.arange(p + 1), np.arange(p + 1))
        out.append(sum(q[r] * m[idx + r] for r in range(len(q))))
    return out


def min_moment_eigenvalue(m: Sequence[float], support: tuple[float, float] = (-np.inf, np.inf)) -> float:
    """Smallest eigenvalue over :func:`localizing_matrices`.

    Concave in ``m``; positive exactly on the interior of the moment space.
    """
    return min(float(np.linalg.eigvalsh(L)[0]) for L in localizing_matrices(m, support))


def moment_space_check(
    m: Sequence[float], support: tuple[float, float], tol: float = TOL_HANKEL
) -> bool:
    """Whether ``m`` is (to ``tol``, relative to each matrix) a moment sequence on ``support``."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 1 or m.size == 0 or not np.all(np.isfinite(m)):
        return False
    for L in localizing_matrices(m, support):
        scale = max(float(np.max(np.abs(np.diag(L)))), 1.0)
        if np.linalg.eigvalsh(L)[0] < -tol * scale:
            return False
    return True


# ---------------------------------------------------------------------------
# weight distributions


@lru_cache(maxsize=None)
def stirling2(k: int, j: int) -> int:
    """Stirling number of the second kind, exact."""
    if k == j:
        return 1
    if j == 0 or j > k:
        return 0
    return j * stirling2(k - 1, j) + stirling2(k - 1, j - 1)


def _finite(value: float, what: str, k: int) -> float:
    if not math.isfinite(value):
        raise OverflowError(f"{what} moment of order {k} overflows double precision")
    return value


@dataclass(frozen=True)
class Normal:
    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("Normal: sigma must be > 0")

    def moment(self, k: int) -> float:
        prev, cur = 1.0, float(self.mu)
        if k == 0:
            return 1.0
        s2 = self.sigma**2
        with np.errstate(over="ignore"):
            for j in range(2, k + 1):
                prev, cur = cur, self.mu * cur + (j - 1) * s2 * prev
        return _finite(cur, "normal", k)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return rng.normal(self.mu, self.sigma, size)

    def to_dict(self) -> dict:
        return {"kind": "normal", "mu": self.mu, "sigma": self.sigma}


@dataclass(frozen=True)
class Poisson:
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("Poisson: lam must be > 0")

    def moment(self, k: int) -> float:
        if k > MAX_POISSON_ORDER:
            raise OverflowError(f"Poisson moments are only supported up to order {MAX_POISSON_ORDER}")
        return _finite(math.fsum(stirling2(k, j) * self.lam**j for j in range(k + 1)), "poisson", k)

    def sample(self, rng, size):
        return rng.poisson(self.lam, size).astype(float)

    def to_dict(self):
        return {"kind": "poisson", "lam": self.lam}


@dataclass(frozen=True)
class Exponential:
    """Exponential distribution with rate ``rate`` (mean ``1 / rate``)."""

    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("Exponential: rate must be > 0")

    def moment(self, k: int) -> float:
        try:
            return _finite(math.factorial(k) / self.rate**k, "exponential", k)
        except OverflowError:
            raise OverflowError(f"exponential moment of order {k} overflows double precision") from None

    def sample(self, rng, size):
        return rng.exponential(1.0 / self.rate, size)

    def to_dict(self):
        return {"kind": "exponential", "rate": self.rate}


@dataclass(frozen=True)
class Discrete:
    values: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        v = tuple(float(x) for x in self.values)
        p = tuple(float(x) for x in self.probs)
        if len(v) != len(p) or not v:
            raise ValueError("Discrete: values and probs must be non-empty and of equal length")
        if min(p) < 0 or abs(math.fsum(p) - 1.0) > 1e-12:
            raise ValueError("Discrete: probs must be nonnegative and sum to 1")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "probs", p)

    def moment(self, k: int) -> float:
        # 0**0 == 1 in Python
        return _finite(math.fsum(p * v**k for v, p in zip(self.values, self.probs)), "discrete", k)

    def sample(self, rng, size):
        return rng.choice(np.array(self.values), size=size, p=np.array(self.probs))

    def to_dict(self):
        return {"kind": "discrete", "values": list(self.values), "probs": list(self.probs)}


MomentProvider = Normal | Poisson | Exponential | Discrete


def dist_moment(dist: MomentProvider, k: int) -> float:
    """Exact ``k``-th raw moment of a weight distribution."""
    if int(k) != k or k < 0:
        raise ValueError(f"moment order must be a nonnegative integer, got {k}")
    return dist.moment(int(k))


def moment_vector(dist: MomentProvider, K: int) -> np.ndarray:
    return np.array([dist_moment(dist, k) for k in range(K + 1)])


def dist_from_dict(obj: dict) -> MomentProvider:
    kind = obj.get("kind")
    if kind == "normal":
        return Normal(float(obj["mu"]), float(obj["sigma"]))
    if kind == "poisson":
        return Poisson(float(obj["lam"]))
    if kind == "exponential":
        return Exponential(float(obj["rate"]))
    if kind == "discrete":
        return Discrete(tuple(obj["values"]), tuple(obj["probs"]))
    raise ValueError(f"unknown distribution kind {kind!r}")


# ---------------------------------------------------------------------------
# latent positions


@dataclass(frozen=True)
class LatentSequence:
    """Latent positions ``X[k]`` for ``k = 1..K``; ``X[0]`` is implicit.

    ``positions`` has shape ``(K, n, d)``; use ``seq[k]`` for ``X[k]``.
    """

    positions: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.positions, dtype=float)
        if X.ndim != 3:
            raise ValueError("positions must have shape (K, n, d)")
        object.__setattr__(self, "positions", X)

    @property
    def K(self) -> int:
        return self.positions.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.positions.shape[1]

    @property
    def dim(self) -> int:
        return self.positions.shape[2]

    def __getitem__(self, k: int) -> np.ndarray:
        if not 1 <= k <= self.K:
            raise IndexError(f"moment order {k} outside 1..{self.K}")
        return self.positions[k - 1]

    @classmethod
    def from_embeddings(cls, embeddings) -> "LatentSequence":
        return cls(np.stack([e.positions for e in embeddings]))


def edge_moment_sequence(latent: LatentSequence, i: int, j: int) -> np.ndarray:
    """``(1, x_i[1].x_j[1], ..., x_i[K].x_j[K])``."""
    if i == j:
        raise ValueError("no self-loops: i and j must differ")
    X = latent.positions
    return np.concatenate([[1.0], np.einsum("kd,kd->k", X[:, i], X[:, j])])


def pair_moments(latent: LatentSequence) -> np.ndarray:
    """Moment sequences of all pairs ``i < j`` in lexicographic order.

    Returns an array of shape ``(n (n - 1) / 2, K + 1)``.
    """
    n = latent.n_nodes
    iu, ju = np.triu_indices(n, 1)
    out = np.empty((len(iu), latent.K + 1))
    out[:, 0] = 1.0
    for k in range(latent.K):
        X = latent.positions[k]
        out[:, k + 1] = (X @ X.T)[iu, ju]
    return out


@dataclass(frozen=True)
class SbmSpec:
    """Weighted stochastic block model.

    Parameters
    ----------
    pi : sequence of float
        Community proportions.
    B : (C, C) array
        Edge probabilities between communities.
    dists : (C, C) nested sequence of distributions
        Weight distribution of each block; must be symmetric.
    N, seed : optional
        Carried along from config files.
    """

    pi: np.ndarray
    B: np.ndarray
    dists: tuple[tuple[MomentProvider, ...], ...]
    N: int | None = None
    seed: int | None = None

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=float)
        B = np.asarray(self.B, dtype=float)
        C = len(pi)
        if C == 0 or np.any(pi <= 0) or abs(pi.sum() - 1) > 1e-9:
            raise ValueError("pi must be positive and sum to 1")
        if B.shape != (C, C) or not np.allclose(B, B.T, atol=0) or np.any((B < 0) | (B > 1)):
            raise ValueError("B must be a symmetric C x C matrix with entries in [0, 1]")
        dists = self.dists
        if not isinstance(dists, (tuple, list)) or not dists or not isinstance(dists[0], (tuple, list)):
            dists = tuple(tuple(dists for _ in range(C)) for _ in range(C))
        dists = tuple(tuple(row) for row in dists)
        if len(dists) != C or any(len(row) != C for row in dists):
            raise ValueError("dists must be a C x C table")
        for l in range(C):
            for m in range(C):
                if dists[l][m] != dists[m][l]:
                    raise ValueError("dists must be symmetric")
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "dists", dists)

    @property
    def C(self) -> int:
        return len(self.pi)

    def block_moment(self, l: int, m: int, k: int) -> float:
        return dist_moment(self.dists[l][m], k)

    def block_moment_matrix(self, k: int) -> np.ndarray:
        """``G_k[l, m] = b_lm * m_lm[k]``."""
        C = self.C
        return np.array([[self.B[l, m] * self.block_moment(l, m, k) for m in range(C)] for l in range(C)])

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "communities": self.C,
            "pi": self.pi.tolist(),
            "B": self.B.tolist(),
            "dists": [[d.to_dict() for d in row] for row in self.dists],
        }
        if self.N is not None:
            out["N"] = self.N
        if self.seed is not None:
            out["seed"] = self.seed
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "SbmSpec":
        dists = obj["dists"]
        if isinstance(dists, dict):
            parsed = dist_from_dict(dists)
        else:
            parsed = tuple(tuple(dist_from_dict(d) for d in row) for row in dists)
        spec = cls(obj["pi"], obj["B"], parsed, obj.get("N"), obj.get("seed"))
        if "communities" in obj and int(obj["communities"]) != spec.C:
            raise ValueError(f"communities={obj['communities']} but pi has length {spec.C}")
        return spec


def load_sbm_spec(source: IO[str] | str) -> SbmSpec:
    text = source if isinstance(source, str) else source.read()
    return SbmSpec.from_dict(json.loads(text))


def save_sbm_spec(spec: SbmSpec) -> str:
    return json.dumps(spec.to_dict(), indent=2)


def psd_triangular_factor(G: np.ndarray, tol: float = TOL_PSD) -> np.ndarray:
    """Lower-triangular ``L`` with nonnegative diagonal and ``L L^T = G``.

    Works for singular PSD matrices: a (numerically) zero pivot zeroes its
    column.
    """
    G = np.asarray(G, dtype=float)
    C = G.shape[0]
    scale = max(np.max(np.abs(np.diag(G))), 1.0)
    L = np.zeros_like(G)
    for j in range(C):
        piv = G[j, j] - L[j, :j] @ L[j, :j]
        if piv > tol * scale:
            L[j, j] = math.sqrt(piv)
            L[j + 1 :, j] = (G[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
        else:
            rest = G[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]
            if piv < -tol * scale or np.any(np.abs(rest) > math.sqrt(tol) * scale):
                raise np.linalg.LinAlgError("matrix is not positive semidefinite")
    return L


@dataclass(frozen=True)
class CommunityPositions:
    """Per-community latent positions; ``pos[k]`` is the ``C x C`` matrix
    whose row ``m`` is ``y_m[k]``."""

    positions: np.ndarray

    @property
    def K(self) -> int:
        return self.positions.shape[0]

    def __getitem__(self, k: int) -> np.ndarray:
        if not 1 <= k <= self.K:
            raise IndexError(f"moment order {k} outside 1..{self.K}")
        return self.positions[k - 1]


def sbm_latent_positions(spec: SbmSpec, K: int, tol_psd: float = TOL_PSD) -> CommunityPositions:
    """Closed-form community latent positions for ``k = 1..K``.

    Each ``y[k]`` is the lower-triangular square root of the block moment
    matrix ``G_k``, which puts community 1 on the first axis.
    """
    out = []
    for k in range(1, K + 1):
        G = spec.block_moment_matrix(k)
        scale = max(np.max(np.abs(G)), 1.0)
        min_eig = np.linalg.eigvalsh(G)[0]
        if min_eig < -tol_psd * scale:
            raise ModelError(
                f"k={k}: block moment matrix B*m[k] is not PSD (min eigenvalue {min_eig:.3g})"
            )
        try:
            out.append(psd_triangular_factor(G, tol_psd))
        except np.linalg.LinAlgError:
            raise ModelError(f"k={k}: block moment matrix B*m[k] is not PSD") from None
    return CommunityPositions(np.stack(out))


def community_sizes(pi: Sequence[float], N: int) -> np.ndarray:
    """Largest-remainder rounding of ``pi * N``."""
    pi = np.asarray(pi, dtype=float)
    raw = pi * N
    sizes = np.floor(raw).astype(int)
    rem = N - sizes.sum()
    order = np.argsort(-(raw - sizes), kind="stable")
    sizes[order[:rem]] += 1
    return sizes


def block_assignments(pi: Sequence[float], N: int) -> np.ndarray:
    """Contiguous community labels: the first ``round(pi[0] N)`` nodes are 0, etc."""
    return np.repeat(np.arange(len(pi)), community_sizes(pi, N))


def expand_to_nodes(community: CommunityPositions, assignments: Sequence[int]) -> LatentSequence:
    """Node positions ``X[k][i] = y_{c(i)}[k]``."""
    z = np.asarray(assignments)
    C = community.positions.shape[1]
    if z.ndim != 1 or (z.size and (z.min() < 0 or z.max() >= C)) or not np.issubdtype(z.dtype, np.integer):
        raise ValueError(f"assignments must be integers in 0..{C - 1}")
    return LatentSequence(community.positions[:, z, :])


def sample_sbm(
    spec: SbmSpec, assignments: Sequence[int], rng: np.random.Generator | int | None
) -> WeightedGraph:
    """Draw a weighted SBM graph: Bernoulli edges, then block weights."""
    rng = np.random.default_rng(rng)
    z = np.asarray(assignments)
    n = len(z)
    iu, ju = np.triu_indices(n, 1)
    zi, zj = np.minimum(z[iu], z[ju]), np.maximum(z[iu], z[ju])
    present = rng.random(len(iu)) < spec.B[zi, zj]
    w = np.zeros(len(iu))
    for l in range(spec.C):
        for m in range(l, spec.C):
            mask = present & (zi == l) & (zj == m)
            cnt = int(mask.sum())
            if cnt:
                w[mask] = spec.dists[l][m].sample(rng, cnt)
    if np.any(w < 0):
        raise ModelError("sampled a negative weight; weights must be nonnegative")
    W = np.zeros((n, n))
    W[iu, ju] = w
    return WeightedGraph(W + W.T)


def sbm_edge_moments(spec: SbmSpec, assignments: Sequence[int], K: int) -> np.ndarray:
    """Exact pair moment sequences of an SBM (lexicographic pairs)."""
    z = np.asarray(assignments)
    n = len(z)
    iu, ju = np.triu_indices(n, 1)
    table = np.stack([np.ones((spec.C, spec.C))] + [spec.block_moment_matrix(k) for k in range(1, K + 1)])
    return table[:, z[iu], z[ju]].T
