import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wrdpg.graph import WeightedGraph
from wrdpg.metrics import (
    MetricSummary,
    betweenness,
    compare_ensemble,
    compare_pools,
    distance_matrix,
    geodesic_distances,
    ks_critical,
    summarize,
    weighted_degree,
)


def path(weights):
    n = len(weights) + 1
    W = np.zeros((n, n))
    for i, w in enumerate(weights):
        W[i, i + 1] = W[i + 1, i] = w
    return W


def star(n):
    W = np.zeros((n, n))
    W[0, 1:] = W[1:, 0] = 1.0
    return W


# ---------------------------------------------------------------------------
# degree and distances


def test_weighted_degree_examples():
    np.testing.assert_array_equal(weighted_degree(np.array([[0, 2], [2, 0.0]])), [2, 2])
    np.testing.assert_array_equal(weighted_degree(np.zeros((3, 3))), [0, 0, 0])
    np.testing.assert_array_equal(weighted_degree(np.ones((3, 3)) - np.eye(3)), [2, 2, 2])
    G = WeightedGraph(path([1.5, 2.0]))
    np.testing.assert_array_equal(weighted_degree(G), [1.5, 3.5, 2.0])


def test_distances_hop_and_weighted():
    W = path([2.0, 4.0])
    assert distance_matrix(W, "hop")[0, 2] == 2
    assert distance_matrix(W, "weighted")[0, 2] == pytest.approx(0.5 + 0.25)
    # a heavy detour beats a light direct edge under 1/w lengths
    W = np.array([[0, 0.5, 4.0], [0.5, 0, 0], [4.0, 0, 0]])
    W[1, 2] = W[2, 1] = 4.0
    assert distance_matrix(W, "weighted")[0, 1] == pytest.approx(0.5)
    assert distance_matrix(W, "hop")[0, 1] == 1


def test_unknown_mode():
    with pytest.raises(ValueError):
        distance_matrix(np.zeros((2, 2)), "euclid")


def test_geodesics_restrict_to_largest_component():
    W = np.zeros((5, 5))
    W[:3, :3] = path([1.0, 1.0])
    W[3, 4] = W[4, 3] = 1.0
    geo = geodesic_distances(W)
    np.testing.assert_array_equal(geo.nodes, [0, 1, 2])
    np.testing.assert_array_equal(geo.distances, [1, 2, 1])
    # 3 * 2 cross-component pairs have no path
    assert geo.unreachable == 6


def test_single_disconnected_pair():
    geo = geodesic_distances(np.zeros((2, 2)))
    assert geo.unreachable == 1
    assert geo.distances.size == 0


# ---------------------------------------------------------------------------
# betweenness


def test_betweenness_examples():
    np.testing.assert_allclose(betweenness(star(5)), [1, 0, 0, 0, 0])
    np.testing.assert_allclose(betweenness(np.ones((4, 4)) - np.eye(4)), 0)
    np.testing.assert_allclose(betweenness(path([1, 1])), [0, 1, 0])
    assert betweenness(np.zeros((2, 2))).tolist() == [0, 0]


def test_betweenness_splits_between_equal_paths():
    # 4-cycle: each node lies on half of the shortest paths between its neighbours
    W = path([1, 1, 1])
    W[0, 3] = W[3, 0] = 1
    np.testing.assert_allclose(betweenness(W, normalized=False), [1, 1, 1, 1])


def test_weighted_betweenness_follows_heavy_edges():
    W = np.array([[0, 0.5, 4.0], [0.5, 0, 4.0], [4.0, 4.0, 0]])
    np.testing.assert_allclose(betweenness(W, "weighted"), [0, 0, 1])
    np.testing.assert_allclose(betweenness(W, "hop"), [0, 0, 0])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["degree", "betweenness", "geodesic"]))
def test_metrics_are_permutation_equivariant(seed, metric):
    rng = np.random.default_rng(seed)
    A = np.triu(rng.integers(1, 4, (7, 7)) * (rng.random((7, 7)) < 0.5), 1).astype(float)
    W = A + A.T
    perm = rng.permutation(7)
    a = summarize(W, metric, "weighted")
    b = summarize(W[np.ix_(perm, perm)], metric, "weighted")
    if metric == "geodesic":
        np.testing.assert_allclose(np.sort(a.values), np.sort(b.values))
    else:
        np.testing.assert_allclose(b.values, a.values[perm], atol=1e-12)
    for q in a.quantiles:
        assert a.quantiles[q] == pytest.approx(b.quantiles[q], nan_ok=True)


# ---------------------------------------------------------------------------
# summaries and comparison


def test_summary_quantiles_and_csv():
    s = MetricSummary("degree", np.array([1.0, 2.0, 3.0, 4.0]))
    assert s.quantiles["median"] == 2.5
    assert s.quantiles["mean"] == 2.5
    assert s.to_csv().splitlines()[:2] == ["index,degree", "0,1"]
    with pytest.raises(ValueError):
        summarize(np.zeros((2, 2)), "closeness")


def test_ks_critical_value():
    # c(0.01) = 1.6276 for the asymptotic two-sample test
    assert ks_critical(100, 100) == pytest.approx(1.6276 * np.sqrt(2 / 100), rel=1e-4)


def test_constant_ensemble():
    ref = MetricSummary("degree", np.full(10, 3.0))
    rep = compare_ensemble(ref, [MetricSummary("degree", np.full(10, 3.0)) for _ in range(5)])
    assert rep.ks == 0 and rep.passed
    assert all(v == 0 for v in rep.z.values())
    off = compare_ensemble(MetricSummary("degree", np.full(10, 4.0)), [ref, ref])
    assert off.z["mean"] == np.inf and not off.passed


def test_reference_drawn_like_the_ensemble_looks_typical():
    rng = np.random.default_rng(0)
    ens = [MetricSummary("degree", rng.normal(size=200)) for _ in range(30)]
    rep = compare_ensemble(ens[0], ens[1:])
    assert rep.ks < 3 * rep.typical_ks
    assert rep.passed


def test_z_scores_are_calibrated():
    # for a reference from the same law |z| should rarely exceed 2
    rng = np.random.default_rng(1)
    medians = []
    for _ in range(50):
        ens = [MetricSummary("degree", rng.exponential(size=100)) for _ in range(21)]
        rep = compare_ensemble(ens[0], ens[1:])
        medians.append(np.median(np.abs(list(rep.z.values()))))
    assert np.mean(np.array(medians) < 2) >= 0.9


def test_shifted_reference_fails():
    rng = np.random.default_rng(2)
    ens = [MetricSummary("degree", rng.normal(size=200)) for _ in range(20)]
    rep = compare_ensemble(MetricSummary("degree", rng.normal(1.0, 1.0, 200)), ens)
    assert not rep.ks_pass and not rep.z_pass
    assert "pass 0" in rep.to_text()


def test_comparison_preconditions():
    a = MetricSummary("degree", np.ones(3))
    with pytest.raises(ValueError):
        compare_ensemble(a, [a])
    with pytest.raises(ValueError):
        compare_ensemble(a, [a, MetricSummary("betweenness", np.ones(3))])


def test_compare_pools():
    rng = np.random.default_rng(3)
    ks, crit, ok = compare_pools([rng.normal(size=500)], [rng.normal(size=500)])
    assert ok and ks < crit
    ks, crit, ok = compare_pools([rng.normal(size=500)], [rng.normal(2, 1, 500)])
    assert not ok
