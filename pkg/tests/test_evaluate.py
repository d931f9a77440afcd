import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from robustseed.core import kmeans_cost, robust_cost
from robustseed.evaluate import (
    ClusteringResult,
    RunRecord,
    brute_force_oracle,
    band_check,
    mark_outliers,
    mark_outliers_at,
    precision_recall,
    restricted_growth_strings,
    summarize,
)


def set_partitions(items, k):
    """All partitions of ``items`` into at most ``k`` nonempty blocks (plain recursion)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest, k):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]
        if len(part) < k:
            yield [[first]] + part


def slow_oracle(X, k, z):
    best = np.inf
    n = len(X)
    for out in itertools.combinations(range(n), z):
        inl = [i for i in range(n) if i not in out]
        for part in set_partitions(inl, k):
            c = sum(float(((X[b] - X[b].mean(0)) ** 2).sum()) for b in part)
            best = min(best, c)
    return best


def stirling_sum(m, k):
    from math import comb, factorial

    def s2(n, j):
        return sum((-1) ** i * comb(j, i) * (j - i) ** n for i in range(j + 1)) // factorial(j)

    return sum(s2(m, j) for j in range(1, k + 1))


class TestMarkOutliers:
    def test_z0(self, rng):
        X = rng.normal(size=(20, 2))
        res = mark_outliers(X, [0, 5], 0)
        assert res.predicted_outliers == frozenset()
        assert res.inlier_cost == pytest.approx(kmeans_cost(X, X[[0, 5]]))

    def test_line(self):
        res = mark_outliers([[0.0], [1.0], [100.0]], [0], 1)
        assert res.predicted_outliers == {2}
        assert res.inlier_cost == 1.0
        assert list(res.assignments) == [0, 0, -1]

    def test_tie_rule_equidistant(self):
        X = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [1.0, 0.0]])
        res = mark_outliers_at(X, [[0.0, 0.0]], 2)
        assert res.predicted_outliers == {4, 3}

    def test_z_too_large(self):
        with pytest.raises(ValueError):
            mark_outliers([[0.0], [1.0]], [0], 2)

    @given(st.integers(0, 10_000), st.integers(0, 30))
    def test_cut_property_and_cost(self, s, z):
        g = np.random.default_rng(s)
        n = 40
        X = np.round(g.normal(size=(n, 2)), 1)
        centers = list(g.choice(n, size=3, replace=False))
        res = mark_outliers(X, centers, z)
        assert len(res.predicted_outliers) == z
        out = np.array(sorted(res.predicted_outliers), dtype=int)
        inl = res.inliers
        if z:
            assert res.d2[out].min() >= res.d2[inl].max()
            # among ties at the cut, outliers carry the higher indices
            cut = res.d2[out].min()
            tied_in = inl[res.d2[inl] == cut]
            tied_out = out[res.d2[out] == cut]
            if tied_in.size and tied_out.size:
                assert tied_in.max() < tied_out.min()
        assert res.inlier_cost == pytest.approx(robust_cost(X, X[centers], z), rel=1e-9, abs=1e-12)


class TestPrecisionRecall:
    def test_identical(self):
        s = set(range(25))
        assert precision_recall(s, s) == (1.0, 1.0)

    def test_disjoint(self):
        assert precision_recall({1, 2}, {3, 4}) == (0.0, 0.0)

    def test_unequal_sizes(self):
        truth = set(range(17))
        pred = set(range(13, 34))  # 21 predicted, overlap 4
        p, r = precision_recall(truth, pred)
        assert p == pytest.approx(4 / 21) and r == pytest.approx(4 / 17)

    def test_empty_sets_are_absent(self):
        assert precision_recall({1}, set()) == (None, 0.0)
        assert precision_recall(set(), {1}) == (0.0, None)

    @given(st.sets(st.integers(0, 50), min_size=1), st.sets(st.integers(0, 50), min_size=1))
    def test_equal_sizes_give_equal_ratios(self, a, b):
        p, r = precision_recall(a, b)
        assert 0 <= p <= 1 and 0 <= r <= 1
        if len(a) == len(b):
            assert p == r


class TestOracle:
    @pytest.mark.parametrize("m,k", [(1, 3), (4, 2), (6, 3), (9, 3), (5, 1)])
    def test_rgs_counts(self, m, k):
        rgs = restricted_growth_strings(m, k)
        assert rgs.shape[0] == stirling_sum(m, k)
        assert len({tuple(r) for r in rgs}) == rgs.shape[0]

    def test_n_equals_k_plus_z(self, rng):
        X = rng.normal(size=(5, 2))
        assert brute_force_oracle(X, 3, 2).opt_cost == 0.0

    def test_line_example(self):
        X = np.array([[0.0], [1.0], [10.0], [11.0], [100.0]])
        sol = brute_force_oracle(X, 2, 1)
        assert sol.opt_cost == pytest.approx(1.0)
        assert sol.opt_outliers == {4}
        assert sorted(sol.opt_partition) == [[0, 1], [2, 3]]

    def test_matches_slow_enumeration(self, rng):
        for _ in range(15):
            n = int(rng.integers(3, 8))
            k = int(rng.integers(1, 4))
            z = int(rng.integers(0, min(3, n)))
            X = rng.normal(size=(n, 2)) * rng.uniform(0.5, 5)
            assert brute_force_oracle(X, k, z).opt_cost == pytest.approx(slow_oracle(X, k, z), rel=1e-9, abs=1e-12)

    def test_lower_bounds_random_center_sets(self, rng):
        X = rng.normal(size=(10, 2))
        X[-1] += 15
        sol = brute_force_oracle(X, 2, 1)
        for _ in range(100):
            C = rng.normal(size=(2, 2)) * 3
            assert sol.opt_cost <= robust_cost(X, C, 1) + 1e-12
            idx = rng.choice(10, size=2, replace=False)
            assert sol.opt_cost <= robust_cost(X, X[idx], 1) + 1e-12

    def test_oracle_means_reproduce_cost(self, rng):
        X = rng.normal(size=(9, 2))
        sol = brute_force_oracle(X, 3, 2)
        inl = [i for i in range(9) if i not in sol.opt_outliers]
        assert robust_cost(X[inl], sol.opt_means, 0) == pytest.approx(sol.opt_cost, rel=1e-9)
        assert robust_cost(X, sol.opt_means, 2) == pytest.approx(sol.opt_cost, rel=1e-9)

    def test_guard(self):
        with pytest.raises(ValueError):
            brute_force_oracle(np.zeros((13, 1)), 2, 1)
        with pytest.raises(ValueError):
            brute_force_oracle(np.zeros((5, 1)), 4, 1)
        with pytest.raises(ValueError):
            brute_force_oracle(np.zeros((5, 1)), 2, 3)

    def test_worst_case_size_runs(self, rng):
        sol = brute_force_oracle(rng.normal(size=(12, 2)), 3, 2)
        assert sol.opt_cost > 0


class TestUniformBand:
    def test_far_center(self, rng):
        A = rng.normal(size=(50, 2))
        rep = band_check(A, [[100.0 * 2, 0.0]])
        assert rep.hypothesis and rep.mu_bound_ok and rep.band_ok

    def test_center_at_mean(self, rng):
        A = rng.normal(size=(30, 3))
        rep = band_check(A, A.mean(axis=0)[None, :])
        assert not rep.hypothesis
        assert rep.mu_bound_ok is None and not rep.counterexample

    def test_random_pairs_have_no_counterexample(self):
        g = np.random.default_rng(0)
        hits = 0
        for _ in range(3000):
            A = g.normal(size=(int(g.integers(1, 40)), 2)) * g.uniform(0.1, 3, size=2)
            S = A.mean(0) + g.normal(size=(int(g.integers(1, 4)), 2)) * g.uniform(0.5, 80)
            rep = band_check(A, S)
            hits += rep.hypothesis
            assert not rep.counterexample
        assert hits > 500


class TestSummarize:
    @staticmethod
    def rec(cost, p=None, r=None, t=0.0):
        res = ClusteringResult([0], frozenset(), cost, np.zeros(1, dtype=int))
        return RunRecord(res, p, r, t)

    def test_single_run(self):
        rep = summarize([self.rec(3.0, 0.5, 0.25, 1.0)])
        assert (rep.cost_min, rep.cost_avg, rep.cost_med) == (3.0, 3.0, 3.0)
        assert (rep.precision_max, rep.precision_avg, rep.precision_med) == (0.5, 0.5, 0.5)
        assert rep.recall_avg == 0.25 and rep.time_avg == 1.0

    def test_even_median(self):
        rep = summarize([self.rec(c) for c in (4.0, 1.0, 3.0, 2.0)])
        assert (rep.cost_min, rep.cost_avg, rep.cost_med) == (1.0, 2.5, 2.5)
        assert rep.precision_avg is None

    def test_empty(self):
        with pytest.raises(ValueError):
            summarize([])
