"""Property suites: Hankel admissibility, dual convexity and gradients,
betweenness against path enumeration, and seed determinism.

Runs on its own in well under a minute.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wrdpg.generator import fit_graph_model, generate_graph, make_rng
from wrdpg.graph import save_edge_list
from wrdpg.maxent import dual_gradient, dual_objective
from wrdpg.metrics import betweenness, distance_matrix
from wrdpg.model import hankel_psd_check, min_hankel_eigenvalue

FAST = settings(max_examples=40, deadline=None)

weights_st = st.lists(st.floats(0.05, 1.0), min_size=1, max_size=6)


@st.composite
def discrete_measures(draw):
    w = np.array(draw(weights_st))
    x = np.array(draw(st.lists(st.floats(-2.0, 2.0), min_size=len(w), max_size=len(w))))
    return x, w / w.sum()


def raw_moments(x, p, K):
    return np.array([np.sum(p * x**k) for k in range(K + 1)])


# ---------------------------------------------------------------------------
# Hankel checks


@FAST
@given(discrete_measures(), st.integers(2, 6))
def test_moments_of_a_measure_are_admissible(measure, K):
    x, p = measure
    assert hankel_psd_check(raw_moments(x, p, K), tol=1e-8)


@FAST
@given(discrete_measures(), st.floats(0.01, 5.0))
def test_negative_variance_is_rejected(measure, excess):
    x, p = measure
    m = raw_moments(x, p, 2)
    m[1] = math.copysign(math.sqrt(m[2] + excess), m[1] if m[1] else 1.0)
    assert not hankel_psd_check(m)


@FAST
@given(discrete_measures(), st.floats(0.5, 3.0).filter(lambda s: abs(s - 1) > 1e-3))
def test_unnormalised_sequence_is_rejected(measure, scale):
    x, p = measure
    assert not hankel_psd_check(scale * raw_moments(x, p, 4))


@FAST
@given(discrete_measures(), st.floats(0.1, 10.0))
def test_hankel_minimum_scales_with_dilation(measure, c):
    # m_k(cX) = c^k m_k(X); Hankel PSD-ness is preserved
    x, p = measure
    assert min_hankel_eigenvalue(raw_moments(c * x, p, 4)) >= -1e-9 * max(1.0, c**4)


# ---------------------------------------------------------------------------
# dual objective: convexity and gradient

SUPPORT = (0.0, 4.0)


@st.composite
def dual_points(draw, K=3):
    x = np.array(draw(st.lists(st.floats(0.2, 3.8), min_size=3, max_size=3)))
    w = np.array(draw(st.lists(st.floats(0.1, 1.0), min_size=3, max_size=3)))
    m = raw_moments(x, w / w.sum(), K)
    lam = np.array(draw(arrays(float, K + 1, elements=st.floats(-1.0, 1.0))))
    return m, lam


@FAST
@given(dual_points(), arrays(float, 4, elements=st.floats(-1.0, 1.0)), st.floats(0.1, 0.9))
def test_dual_is_convex_along_segments(point, direction, t):
    m, a = point
    b = a + direction
    fa, fb = dual_objective(a, m, SUPPORT), dual_objective(b, m, SUPPORT)
    fmid = dual_objective((1 - t) * a + t * b, m, SUPPORT)
    assert fmid <= (1 - t) * fa + t * fb + 1e-9 * (1 + abs(fa) + abs(fb))


@FAST
@given(dual_points())
def test_dual_gradient_matches_finite_differences(point):
    m, lam = point
    g = dual_gradient(lam, m, SUPPORT)
    fd = np.empty_like(g)
    for k in range(len(lam)):
        h = 1e-6 * max(1.0, abs(lam[k]))
        e = np.zeros_like(lam)
        e[k] = h
        fd[k] = (dual_objective(lam + e, m, SUPPORT) - dual_objective(lam - e, m, SUPPORT)) / (2 * h)
    scale = max(1.0, float(np.max(np.abs(g))))
    assert np.max(np.abs(g - fd)) <= 1e-5 * scale


# ---------------------------------------------------------------------------
# betweenness by brute force


def _simple_path_betweenness(L):
    """Enumerate every simple path, keep the shortest per ordered pair."""
    n = L.shape[0]
    bc = np.zeros(n)
    for s, t in itertools.permutations(range(n), 2):
        best, paths = np.inf, []
        stack = [(s, (s,), 0.0)]
        while stack:
            v, path, length = stack.pop()
            if v == t:
                if length < best * (1 - 1e-12):
                    best, paths = length, [path]
                elif length <= best * (1 + 1e-12):
                    paths.append(path)
                continue
            for w in np.flatnonzero(L[v] > 0):
                if w not in path:
                    stack.append((int(w), path + (int(w),), length + L[v, w]))
        for path in paths:
            for v in path[1:-1]:
                bc[v] += 1.0 / len(paths)
    return bc / ((n - 1) * (n - 2))


@st.composite
def small_graphs(draw):
    n = draw(st.integers(3, 7))
    iu = np.triu_indices(n, 1)
    present = np.array(draw(st.lists(st.booleans(), min_size=len(iu[0]), max_size=len(iu[0]))))
    # small integer weights make equal-length alternatives common
    w = np.array(draw(st.lists(st.sampled_from([0.5, 1.0, 2.0, 4.0]), min_size=len(iu[0]), max_size=len(iu[0]))))
    A = np.zeros((n, n))
    A[iu] = np.where(present, w, 0.0)
    return A + A.T


@settings(max_examples=60, deadline=None)
@given(small_graphs(), st.sampled_from(["hop", "weighted"]))
def test_betweenness_matches_path_enumeration(A, mode):
    L = (A > 0).astype(float) if mode == "hop" else np.where(A > 0, 1.0 / np.where(A > 0, A, 1.0), 0.0)
    np.testing.assert_allclose(betweenness(A, mode), _simple_path_betweenness(L), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(small_graphs(), st.sampled_from(["hop", "weighted"]))
def test_distances_satisfy_triangle_inequality(A, mode):
    D = distance_matrix(A, mode)
    n = D.shape[0]
    for i, j, k in itertools.product(range(n), repeat=3):
        if np.isfinite(D[i, k]) and np.isfinite(D[k, j]):
            assert D[i, j] <= D[i, k] + D[k, j] + 1e-12


# ---------------------------------------------------------------------------
# seed determinism


def _toy_model():
    M = np.array([[1.0, 0.5, 0.5], [1.0, 0.3, 0.2], [1.0, 0.8, 1.0]])
    M = np.tile(M, (5, 1))[:15]  # 6 nodes -> 15 pairs
    p0 = np.tile([0.2, 0.5, 0.0], 5)[:15]
    return fit_graph_model(M, 6, "mixed", p0=p0, support=(0.0, 4.0))


MODEL = _toy_model()


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**64 - 1))
def test_same_seed_gives_identical_bytes(seed):
    a = save_edge_list(generate_graph(MODEL, make_rng(seed))).encode()
    b = save_edge_list(generate_graph(MODEL, make_rng(seed))).encode()
    assert a == b


def test_different_seeds_differ():
    a = save_edge_list(generate_graph(MODEL, make_rng(1)))
    b = save_edge_list(generate_graph(MODEL, make_rng(2)))
    assert a != b
