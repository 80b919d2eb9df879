"""Decoder tests: metric vs Dijkstra, matching vs brute force, dual routes.

Two independent oracles anchor everything: an explicit triangular graph on
which networkx Dijkstra computes true shortest paths, and a factorial
enumeration of perfect matchings for small defect sets.
"""

import itertools
import math

import networkx as nx
import numpy as np
import pytest

from replab import decoder, lattice
from replab.noise_model import EffectiveRates


def triangular_graph(metric, radius):
    """Explicit defect graph: p edges (x+-1), q edges (t+-1), r diagonals."""
    g = nx.Graph()
    rng = range(-radius, radius + 1)
    for x in rng:
        for t in rng:
            if x + 1 <= radius:
                g.add_edge((x, t), (x + 1, t), weight=metric.w_p)
            if t + 1 <= radius:
                g.add_edge((x, t), (x, t + 1), weight=metric.w_q)
            if x + 1 <= radius and t + 1 <= radius:
                g.add_edge(
                    (x * metric.r_sign, t),
                    ((x + 1) * metric.r_sign, t + 1),
                    weight=metric.w_r,
                )
    return g


def brute_force_min_matching(weights):
    """Factorial enumeration of perfect matchings on a dense weight matrix."""
    n = weights.shape[0]
    best = math.inf
    nodes = list(range(n))

    def rec(remaining, acc):
        nonlocal best
        if acc >= best:
            return
        if not remaining:
            best = acc
            return
        u = remaining[0]
        for v in remaining[1:]:
            if math.isfinite(weights[u, v]):
                rest = [x for x in remaining[1:] if x != v]
                rec(rest, acc + weights[u, v])

    rec(nodes, 0.0)
    return best


class TestWeightMetric:
    def test_weights_from_rates(self):
        m = decoder.weight_metric(EffectiveRates(p=0.1, q=0.2, r=0.0))
        assert m.w_p == pytest.approx(-math.log(0.1 / 0.9))
        assert m.w_q == pytest.approx(-math.log(0.2 / 0.8))
        assert math.isinf(m.w_r)

    def test_rate_at_half_rejected(self):
        with pytest.raises(ValueError):
            decoder.weight_metric(EffectiveRates(p=0.5, q=0.1, r=0.1))

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            decoder.WeightMetric(w_p=-1.0, w_q=1.0, w_r=1.0)

    def test_bad_r_sign_rejected(self):
        with pytest.raises(ValueError):
            decoder.WeightMetric(w_p=1.0, w_q=1.0, w_r=1.0, r_sign=0)


class TestDefectDistance:
    def test_against_dijkstra_grid(self):
        # every displacement within |dx|, |dt| <= 6 for a few weight shapes
        triples = [(1.0, 1.0, 1.0), (2.0, 1.0, 0.7), (1.0, 3.0, 1.5), (0.9, 2.1, 3.0)]
        for w_p, w_q, w_r in triples:
            metric = decoder.WeightMetric(w_p=w_p, w_q=w_q, w_r=w_r)
            g = triangular_graph(metric, radius=13)
            dist = nx.single_source_dijkstra_path_length(g, (0, 0))
            for dx in range(-6, 7):
                for dt in range(-6, 7):
                    got = decoder.defect_distance((0, 0), (dx, dt), metric)
                    assert got == pytest.approx(dist[(dx, dt)], abs=1e-9), (dx, dt)

    def test_against_dijkstra_random_weights(self):
        rng = np.random.default_rng(3)
        for trial in range(100):
            w_p, w_q, w_r = rng.random(3) * 3 + 0.05
            if trial % 5 == 0:
                w_q = w_p + w_r  # degenerate: a q step ties with a p+r detour
            metric = decoder.WeightMetric(w_p=w_p, w_q=w_q, w_r=w_r)
            g = triangular_graph(metric, radius=9)
            dist = nx.single_source_dijkstra_path_length(g, (0, 0))
            for dx, dt in [(3, -2), (-4, 4), (2, 4), (-3, -3), (4, 1), (0, 4)]:
                got = decoder.defect_distance((0, 0), (dx, dt), metric)
                assert got == pytest.approx(dist[(dx, dt)], abs=1e-9)

    def test_pseudometric_properties(self):
        rng = np.random.default_rng(4)
        metric = decoder.WeightMetric(w_p=1.3, w_q=0.8, w_r=1.9)
        pts = [tuple(map(int, rng.integers(-8, 9, 2))) for _ in range(40)]
        for a, b, c in itertools.islice(itertools.combinations(pts, 3), 300):
            dab = decoder.defect_distance(a, b, metric)
            assert dab == pytest.approx(decoder.defect_distance(b, a, metric))
            assert dab <= (
                decoder.defect_distance(a, c, metric)
                + decoder.defect_distance(c, b, metric)
                + 1e-9
            )
        for a in pts:
            assert decoder.defect_distance(a, a, metric) == 0.0

    def test_r_sign_mirror(self):
        m_plus = decoder.WeightMetric(w_p=1.0, w_q=1.0, w_r=0.3, r_sign=1)
        m_minus = decoder.WeightMetric(w_p=1.0, w_q=1.0, w_r=0.3, r_sign=-1)
        for dx, dt in [(2, 2), (-1, 3), (4, -2)]:
            assert decoder.defect_distance((0, 0), (dx, dt), m_plus) == pytest.approx(
                decoder.defect_distance((0, 0), (-dx, dt), m_minus)
            )

    def test_example_equal_weights(self):
        # a (2, 1) displacement with equal weights costs two edges (one r, one p)
        m = decoder.WeightMetric(w_p=1.0, w_q=1.0, w_r=1.0)
        assert decoder.defect_distance((0, 0), (2, 1), m) == pytest.approx(2.0)


class TestBoundary:
    def test_distance_uses_cheaper_step(self):
        dims = lattice.LatticeDims(d=7, T=5)
        m = decoder.WeightMetric(w_p=2.0, w_q=1.0, w_r=0.5)
        assert decoder.boundary_distance(0, m, dims) == pytest.approx(0.5)
        assert decoder.boundary_distance(5, m, dims) == pytest.approx(0.5)
        assert decoder.boundary_distance(3, m, dims) == pytest.approx(1.5)

    def test_single_defect_decodes_to_near_boundary(self):
        dims = lattice.LatticeDims(d=5, T=3)
        m = decoder.WeightMetric(w_p=1.0, w_q=1.0, w_r=1.0)
        dv = np.zeros((4, 3), dtype=bool)
        dv[0, 1] = True
        corr = decoder.decode(dv, m, dims)
        assert corr.tolist() == [True, False, False, False, False]
        dv = np.zeros((4, 3), dtype=bool)
        dv[3, 1] = True
        corr = decoder.decode(dv, m, dims)
        assert corr.tolist() == [False, False, False, False, True]


class TestMatching:
    def test_exact_vs_brute_force(self):
        rng = np.random.default_rng(6)
        dims = lattice.LatticeDims(d=9, T=9)
        m = decoder.WeightMetric(w_p=1.0, w_q=1.4, w_r=0.9)
        for _ in range(300):
            n = int(rng.integers(1, 9))
            xs = rng.integers(0, dims.d - 1, n)
            ts = rng.integers(1, dims.T + 1, n)
            defects = np.unique(np.stack([xs, ts], axis=1), axis=0)
            graph = decoder.build_matching_graph(defects, m, dims)
            got = decoder.solve_mwpm(graph).total_weight
            want = brute_force_min_matching(graph.weights)
            assert got == pytest.approx(want, abs=1e-6)

    def test_two_routes_agree(self):
        # reduced-graph decode total equals the virtual-node construction
        rng = np.random.default_rng(13)
        dims = lattice.LatticeDims(d=7, T=7)
        rates = EffectiveRates(p=0.08, q=0.08, r=0.04)
        metric = decoder.weight_metric(rates)
        for seed in rng.integers(0, 2**31 - 1, 100):
            sample = lattice.sample_disorder(dims, rates, int(seed))
            dv = lattice.syndrome_volume(lattice.chain_from_disorder(sample))
            _, total = decoder._decode_with_weight(dv, metric, dims)
            assert total == pytest.approx(
                decoder.matched_weight(dv, metric, dims), abs=1e-6
            )

    def test_fallback_backend_agrees(self, monkeypatch):
        rng = np.random.default_rng(17)
        n = 10
        W = rng.random((n, n)) * 5
        W = np.triu(W, 1)
        W = W + W.T
        with_ext = decoder._solve_int_matching(W)
        monkeypatch.setattr(decoder, "_blossom", None)
        without = decoder._solve_int_matching(W)
        w1 = sum(W[i, j] for i, j in with_ext)
        w2 = sum(W[i, j] for i, j in without)
        assert w1 == pytest.approx(w2, abs=1e-9)

    def test_odd_node_count_rejected(self):
        with pytest.raises(ValueError):
            decoder._solve_int_matching(np.ones((3, 3)))

    def test_empty_graph(self):
        assert decoder._solve_int_matching(np.zeros((0, 0))) == []


class TestTrials:
    def test_zero_noise_always_succeeds(self):
        dims = lattice.LatticeDims(d=5, T=5)
        rate, err = decoder.logical_error_rate(
            dims, EffectiveRates(p=0.0, q=0.0, r=0.0), trials=10, seed=0
        )
        assert rate == 0.0

    def test_correction_clears_syndrome(self):
        dims = lattice.LatticeDims(d=5, T=5)
        rates = EffectiveRates(p=0.12, q=0.12, r=0.06)
        metric = decoder.weight_metric(rates)
        for seed in range(200):
            # run_trial itself raises if the correction leaves a syndrome
            outcome = decoder.run_trial(dims, rates, metric, seed)
            assert outcome.matched_weight >= 0.0

    def test_failure_count_consistent_with_rate(self):
        dims = lattice.LatticeDims(d=3, T=3)
        rates = EffectiveRates(p=0.1, q=0.1, r=0.05)
        rate, _ = decoder.logical_error_rate(dims, rates, trials=500, seed=21)
        failures = decoder.failure_count(dims, rates, trials=500, seed=21)
        assert failures == int(round(rate * 500))

    def test_suppression_with_distance(self):
        # well below threshold, larger codes fail less often
        rates = EffectiveRates(p=0.02, q=0.02, r=0.01)
        r3, _ = decoder.logical_error_rate(
            lattice.LatticeDims(d=3, T=3), rates, trials=4000, seed=5
        )
        r7, _ = decoder.logical_error_rate(
            lattice.LatticeDims(d=7, T=7), rates, trials=4000, seed=5
        )
        assert r7 < r3
