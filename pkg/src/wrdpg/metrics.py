"""Graph statistics for comparing synthetic replicates with a reference.

Shortest-path lengths are hop counts (``mode="hop"``) or sums of ``1/w``
over the edges (``mode="weighted"``; heavy edges are short).
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats
from scipy.sparse import csgraph

from .graph import WeightedGraph, format_float

QUANTILES = ("min", "q25", "median", "q75", "max", "mean")
TIE_RTOL = 1e-12
MODES = ("hop", "weighted")


def _weights(W) -> np.ndarray:
    return W.weights if isinstance(W, WeightedGraph) else np.asarray(W, dtype=float)


def _lengths(W, mode: str) -> np.ndarray:
    A = _weights(W)
    if mode == "hop":
        return (A > 0).astype(float)
    if mode == "weighted":
        with np.errstate(divide="ignore"):
            return np.where(A > 0, 1.0 / np.where(A > 0, A, 1.0), 0.0)
    raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def weighted_degree(W) -> np.ndarray:
    """Row sums of the weight matrix."""
    return _weights(W).sum(axis=1)


def distance_matrix(W, mode: str = "hop") -> np.ndarray:
    """All-pairs shortest-path lengths; ``inf`` where unreachable."""
    L = _lengths(W, mode)
    if L.shape[0] == 0:
        return np.zeros((0, 0))
    return csgraph.shortest_path(L, method="D", directed=False, unweighted=(mode == "hop"))


@dataclass(frozen=True)
class Geodesics:
    """Pair distances inside the largest connected component.

    ``distances`` lists ``i < j`` pairs of ``nodes`` in lexicographic
    order; ``unreachable`` counts node pairs of the whole graph with no
    connecting path.
    """

    distances: np.ndarray
    nodes: np.ndarray
    unreachable: int


def geodesic_distances(W, mode: str = "hop") -> Geodesics:
    D = distance_matrix(W, mode)
    n = D.shape[0]
    iu, ju = np.triu_indices(n, 1)
    unreachable = int(np.count_nonzero(~np.isfinite(D[iu, ju])))
    if n == 0:
        return Geodesics(np.zeros(0), np.zeros(0, dtype=int), 0)
    _, labels = csgraph.connected_components((_weights(W) > 0).astype(float), directed=False)
    sizes = np.bincount(labels)
    nodes = np.flatnonzero(labels == int(np.argmax(sizes)))
    sub = D[np.ix_(nodes, nodes)]
    a, b = np.triu_indices(len(nodes), 1)
    return Geodesics(sub[a, b], nodes, unreachable)


def betweenness(W, mode: str = "hop", normalized: bool = True) -> np.ndarray:
    """Shortest-path betweenness by Brandes' dependency accumulation.

    Summed over ordered source/target pairs and, when ``normalized``,
    divided by ``(n-1)(n-2)``. Distances come from a label-setting search;
    an edge ``v -> w`` lies on a shortest path from ``s`` when
    ``d(s,v) + len(v,w)`` equals ``d(s,w)`` up to a relative ``1e-12``.
    """
    L = _lengths(W, mode)
    n = L.shape[0]
    bc = np.zeros(n)
    if n < 3:
        return bc
    D = distance_matrix(W, mode)
    edge = L > 0
    for s in range(n):
        d = D[s]
        reach = np.isfinite(d)
        # pred[v, w]: v precedes w on a shortest s-w path
        tol = TIE_RTOL * np.maximum(np.where(reach, np.abs(d), 0.0), 1.0)[None, :]
        with np.errstate(invalid="ignore"):
            through = d[:, None] + np.where(edge, L, np.inf)
            pred = edge & reach[:, None] & reach[None, :] & (np.abs(through - d[None, :]) <= tol)
        order = np.flatnonzero(reach)
        order = order[np.argsort(d[order], kind="stable")]
        sigma = np.zeros(n)
        sigma[s] = 1.0
        for w in order:
            if w != s:
                sigma[w] = sigma[pred[:, w]].sum()
        delta = np.zeros(n)
        for w in order[::-1]:
            preds = np.flatnonzero(pred[:, w])
            if preds.size and sigma[w] > 0:
                delta[preds] += sigma[preds] / sigma[w] * (1.0 + delta[w])
        delta[s] = 0.0
        bc += delta
    if normalized:
        bc /= (n - 1) * (n - 2)
    return bc


# ---------------------------------------------------------------------------
# summaries and comparison


@dataclass(frozen=True)
class MetricSummary:
    """Values of one metric (per node or per pair) and their quantiles."""

    metric: str
    values: np.ndarray
    quantiles: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        object.__setattr__(self, "values", v)
        if not self.quantiles:
            object.__setattr__(self, "quantiles", _quantiles(v))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"index,{self.metric}\n")
        for i, v in enumerate(self.values):
            buf.write(f"{i},{format_float(v)}\n")
        return buf.getvalue()


def _quantiles(v: np.ndarray) -> dict:
    if v.size == 0:
        return {q: float("nan") for q in QUANTILES}
    q25, med, q75 = np.quantile(v, [0.25, 0.5, 0.75])
    return {
        "min": float(v.min()),
        "q25": float(q25),
        "median": float(med),
        "q75": float(q75),
        "max": float(v.max()),
        "mean": float(v.mean()),
    }


def summarize(W, metric: str, mode: str = "hop") -> MetricSummary:
    """``metric`` is ``"degree"``, ``"geodesic"`` or ``"betweenness"``."""
    if metric == "degree":
        return MetricSummary(metric, weighted_degree(W))
    if metric == "geodesic":
        return MetricSummary(metric, geodesic_distances(W, mode).distances)
    if metric == "betweenness":
        return MetricSummary(metric, betweenness(W, mode))
    raise ValueError(f"unknown metric {metric!r}")


def ks_critical(n: int, m: int, alpha: float = 0.01) -> float:
    """Asymptotic two-sample KS critical value at level ``alpha``."""
    c = np.sqrt(-0.5 * np.log(alpha / 2.0))
    return float(c * np.sqrt((n + m) / (n * m)))


@dataclass(frozen=True)
class ComparisonReport:
    metric: str
    z: dict
    ks: float
    ks_pvalue: float
    ks_critical: float
    typical_ks: float
    z_max: float
    alpha: float

    @property
    def z_pass(self) -> bool:
        return all(abs(v) <= self.z_max for v in self.z.values())

    @property
    def ks_pass(self) -> bool:
        return self.ks < self.ks_critical

    @property
    def passed(self) -> bool:
        return self.z_pass and self.ks_pass

    def to_text(self) -> str:
        lines = [f"metric {self.metric}"]
        lines += [f"z_{q} {format_float(v)}" for q, v in self.z.items()]
        lines += [
            f"z_max {format_float(self.z_max)}",
            f"z_pass {int(self.z_pass)}",
            f"ks {format_float(self.ks)}",
            f"ks_pvalue {format_float(self.ks_pvalue)}",
            f"ks_critical {format_float(self.ks_critical)}",
            f"ks_alpha {format_float(self.alpha)}",
            f"typical_ks {format_float(self.typical_ks)}",
            f"ks_pass {int(self.ks_pass)}",
            f"pass {int(self.passed)}",
        ]
        return "\n".join(lines) + "\n"


def _ks(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    if a.size == 0 or b.size == 0:
        return float("nan"), float("nan")
    res = stats.ks_2samp(a, b)
    return float(res.statistic), float(res.pvalue)


def compare_ensemble(
    reference: MetricSummary, ensemble: Sequence[MetricSummary], z_max: float = 3.0, alpha: float = 0.01
) -> ComparisonReport:
    """Where the reference sits within an ensemble of replicates.

    Each summary quantile of the reference gets a z-score against the
    spread of that quantile over the ensemble. The reference values are
    compared with the pooled ensemble values by a two-sample KS test; the
    statistic is also put in context by the median leave-one-out KS of the
    ensemble members against the rest.
    """
    if len(ensemble) < 2:
        raise ValueError("ensemble needs at least 2 members")
    if any(e.metric != reference.metric for e in ensemble):
        raise ValueError("ensemble members must share the reference metric")
    z = {}
    for q in QUANTILES:
        vals = np.array([e.quantiles[q] for e in ensemble])
        mu, sd = vals.mean(), vals.std(ddof=1)
        diff = reference.quantiles[q] - mu
        if sd > 0:
            z[q] = float(diff / sd)
        else:
            z[q] = 0.0 if abs(diff) <= 1e-12 * max(1.0, abs(mu)) else float(np.sign(diff) * np.inf)
    pooled = np.concatenate([e.values for e in ensemble])
    ks, pval = _ks(reference.values, pooled)
    loo = []
    for i, e in enumerate(ensemble):
        rest = np.concatenate([f.values for j, f in enumerate(ensemble) if j != i])
        loo.append(_ks(e.values, rest)[0])
    crit = ks_critical(max(reference.values.size, 1), max(pooled.size, 1), alpha)
    return ComparisonReport(reference.metric, z, ks, pval, crit, float(np.median(loo)), z_max, alpha)


def compare_pools(
    a: Sequence[np.ndarray], b: Sequence[np.ndarray], alpha: float = 0.01
) -> tuple[float, float, bool]:
    """KS statistic between two pooled samples, its critical value and the verdict."""
    pa, pb = np.concatenate(list(a)), np.concatenate(list(b))
    ks, _ = _ks(pa, pb)
    crit = ks_critical(pa.size, pb.size, alpha)
    return ks, crit, bool(ks < crit)
