"""Weighted graph container, entrywise powers and plain-text I/O."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np


class GraphFormatError(ValueError):
    """Raised for malformed or inconsistent edge-list input."""


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected weighted graph stored as a dense symmetric matrix.

    Parameters
    ----------
    weights : ndarray of shape (n, n)
        Symmetric, nonnegative, finite, zero diagonal. A zero entry means
        the edge is absent.
    labels : sequence of str, optional
        Node names, in index order. Defaults to ``"0", "1", ...``.
    """

    weights: np.ndarray
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        W = np.array(self.weights, dtype=float, copy=True)
        if W.ndim != 2 or W.shape[0] != W.shape[1] or W.shape[0] == 0:
            raise ValueError(f"weights must be a non-empty square matrix, got shape {W.shape}")
        if not np.all(np.isfinite(W)):
            raise ValueError("weights must be finite")
        if np.any(W < 0):
            raise ValueError("weights must be nonnegative")
        if np.any(np.diag(W) != 0):
            raise ValueError("self-loops are not supported: diagonal must be zero")
        if not np.array_equal(W, W.T):
            raise ValueError("weights must be symmetric")
        W.setflags(write=False)
        object.__setattr__(self, "weights", W)
        n = W.shape[0]
        labels = tuple(str(s) for s in self.labels) if self.labels else tuple(str(i) for i in range(n))
        if len(labels) != n:
            raise ValueError(f"expected {n} labels, got {len(labels)}")
        object.__setattr__(self, "labels", labels)

    @property
    def n_nodes(self) -> int:
        return self.weights.shape[0]

    def edges(self):
        """Yield ``(i, j, w)`` for ``i < j`` and ``w > 0`` in lexicographic order."""
        iu, ju = np.nonzero(np.triu(self.weights, 1))
        for i, j in zip(iu, ju):
            yield int(i), int(j), float(self.weights[i, j])

    @property
    def n_edges(self) -> int:
        return int(np.count_nonzero(np.triu(self.weights, 1)))

    def density(self) -> float:
        n = self.n_nodes
        return self.n_edges / (n * (n - 1) / 2) if n > 1 else 0.0


def from_upper(n: int, values: np.ndarray, labels: Sequence[str] = ()) -> WeightedGraph:
    """Build a graph from the strictly-upper-triangular entries in row-major order."""
    W = np.zeros((n, n))
    W[np.triu_indices(n, 1)] = values
    return WeightedGraph(W + W.T, tuple(labels))


def _parse_weight(token: str, lineno: int) -> float:
    try:
        w = float(token)
    except ValueError:
        raise GraphFormatError(f"line {lineno}: weight {token!r} is not a number") from None
    if not math.isfinite(w):
        raise GraphFormatError(f"line {lineno}: non-finite weight {token!r}")
    if w < 0:
        raise GraphFormatError(f"line {lineno}: negative weight {w}")
    if w == 0:
        raise GraphFormatError(f"line {lineno}: zero weight (absent edges must be omitted)")
    return w


def load_edge_list(source: IO | str | bytes, format: str = "whitespace") -> WeightedGraph:
    """Read an undirected edge list.

    Records are ``src dst weight`` (``format="whitespace"``) or
    ``src,dst,weight`` (``format="csv"``). Lines starting with ``#`` are
    comments, except a ``# nodes: a b c`` header, which declares nodes up
    front (this is how isolated nodes are represented). Node ids are
    assigned indices in order of first appearance.

    Raises
    ------
    GraphFormatError
        On malformed records, self-loops, nonpositive or non-finite
        weights, or duplicate records with conflicting weights.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
    if format not in ("whitespace", "csv"):
        raise ValueError(f"unknown edge-list format {format!r}")

    index: dict[str, int] = {}
    edges: dict[tuple[int, int], float] = {}

    def node(name: str) -> int:
        if name not in index:
            index[name] = len(index)
        return index[name]

    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped[1:].strip()
            if body.lower().startswith("nodes:"):
                names = body[len("nodes:"):].replace(",", " ").split()
                for name in names:
                    node(name)
            continue
        if format == "csv":
            fields = [f.strip() for f in next(csv.reader([stripped]))]
        else:
            fields = stripped.split()
        if len(fields) != 3 or not fields[0] or not fields[1]:
            raise GraphFormatError(f"line {lineno}: expected 3 fields (src dst weight), got {len(fields)}")
        src, dst, tok = fields
        if src == dst:
            raise GraphFormatError(f"line {lineno}: self-loop on node {src!r}")
        w = _parse_weight(tok, lineno)
        i, j = node(src), node(dst)
        key = (min(i, j), max(i, j))
        if key in edges and edges[key] != w:
            raise GraphFormatError(
                f"line {lineno}: conflicting duplicate edge {src}-{dst}: {edges[key]} vs {w}"
            )
        edges[key] = w

    if not index:
        raise GraphFormatError("edge list contains no nodes")
    n = len(index)
    W = np.zeros((n, n))
    for (i, j), w in edges.items():
        W[i, j] = W[j, i] = w
    labels = [None] * n
    for name, i in index.items():
        labels[i] = name
    return WeightedGraph(W, tuple(labels))


def save_edge_list(graph: WeightedGraph, dest: IO[str] | None = None, format: str = "whitespace") -> str:
    """Write ``graph`` as an edge list; returns the text.

    Weights use ``repr`` so a save/load round trip is bit-exact. A
    ``# nodes:`` header keeps node order and isolated nodes.
    """
    sep = "," if format == "csv" else " "
    buf = io.StringIO()
    buf.write("# nodes: " + " ".join(graph.labels) + "\n")
    for i, j, w in graph.edges():
        buf.write(f"{graph.labels[i]}{sep}{graph.labels[j]}{sep}{w!r}\n")
    text = buf.getvalue()
    if dest is not None:
        dest.write(text)
    return text


def hadamard_power(graph: WeightedGraph | np.ndarray, k: int) -> np.ndarray:
    """Entrywise ``k``-th power of the weight matrix (``k >= 1``).

    The ``k = 0`` moment is never formed as a matrix; it is fixed at 1
    analytically wherever moment sequences are assembled.
    """
    if int(k) != k or k < 1:
        raise ValueError(f"k must be an integer >= 1, got {k}")
    W = graph.weights if isinstance(graph, WeightedGraph) else np.asarray(graph, dtype=float)
    with np.errstate(over="raise"):
        try:
            return W ** int(k)
        except FloatingPointError:
            raise OverflowError(f"entrywise power {k} overflows for max weight {W.max()}") from None


def indicator_matrix(graph: WeightedGraph | np.ndarray) -> np.ndarray:
    """Binary matrix ``A = 1{W > 0}`` with a zero diagonal."""
    W = graph.weights if isinstance(graph, WeightedGraph) else np.asarray(graph, dtype=float)
    A = (W > 0).astype(float)
    np.fill_diagonal(A, 0.0)
    return A


def format_float(x: float) -> str:
    return f"{x:.17g}"


def dump_matrix(M: np.ndarray, dest: IO[str] | None = None) -> str:
    """Dense rows, space separated, 17 significant digits."""
    text = "".join(" ".join(format_float(v) for v in row) + "\n" for row in np.atleast_2d(M))
    if dest is not None:
        dest.write(text)
    return text


def load_matrix(source: IO[str] | str | Iterable[str]) -> np.ndarray:
    if isinstance(source, str):
        source = source.splitlines()
    rows = [[float(t) for t in line.split()] for line in source if line.strip()]
    return np.array(rows)
