import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from matter.stats import (PerformanceMatrix, cliffs_delta, delta_matrix, kendall, magnitude, rank_transform,
                          scott_knott_esd, spearman)


def matrix(rows, higher=True):
    names = [f"M{i}" for i in range(len(rows))]
    return PerformanceMatrix(names, [f"d{j}" for j in range(len(rows[0]))], rows, higher)


class TestRankTransform:
    def test_mid_ranks(self):
        ranks = rank_transform(PerformanceMatrix(("a", "b", "c"), ("d",), ((0.3,), (0.1,), (0.3,))))
        assert ranks.ranks[:, 0].tolist() == [1.5, 3.0, 1.5]

    def test_lower_is_better(self):
        ranks = rank_transform(PerformanceMatrix(("a", "b"), ("d",), ((0.0,), (0.2,)), higher_is_better=False))
        assert ranks.ranks[:, 0].tolist() == [1.0, 2.0]

    def test_undefined_ranked_worst(self):
        ranks = rank_transform(PerformanceMatrix(("a", "b", "c"), ("d",), ((None,), (0.1,), (0.5,))))
        assert ranks.ranks[:, 0].tolist() == [3.0, 2.0, 1.0]
        assert ranks.undefined[:, 0].tolist() == [True, False, False]
        ranks = rank_transform(PerformanceMatrix(("a", "b", "c", "d"), ("x",),
                                                 ((None,), (0.1,), (float("nan"),), (0.5,))))
        assert ranks.ranks[:, 0].tolist() == [3.5, 2.0, 3.5, 1.0]

    def test_preconditions(self):
        with pytest.raises(ValueError):
            rank_transform(PerformanceMatrix(("a",), ("d",), ((1.0,),)))
        with pytest.raises(ValueError, match="fewer than 2 defined"):
            rank_transform(PerformanceMatrix(("a", "b"), ("d",), ((1.0,), (None,))))
        with pytest.raises(ValueError):
            PerformanceMatrix(("a", "b"), ("d",), ((1.0,),))

    @settings(max_examples=200)
    @given(st.integers(2, 8), st.integers(1, 6), st.integers(0, 10_000))
    def test_column_sums(self, m, d, seed):
        rng = random.Random(seed)
        rows = [[rng.choice([None, 0.0, 0.5, 1.0, rng.random()]) for _ in range(d)] for _ in range(m)]
        for j in range(d):
            rows[0][j], rows[1][j] = 0.25, 0.75
        ranks = rank_transform(matrix(rows)).ranks
        np.testing.assert_allclose(ranks.sum(axis=0), m * (m + 1) / 2)


class TestCliff:
    def test_examples(self):
        res = cliffs_delta([1, 2, 3], [1, 2, 3])
        assert res.delta == 0 and res.magnitude == "negligible"
        assert cliffs_delta([2, 2], [1, 3]).delta == 0
        assert cliffs_delta([5, 6], [1, 2]).delta == 1.0
        assert magnitude(0.2) == "small"

    @pytest.mark.parametrize("delta, label", [(0.146, "negligible"), (0.147, "small"), (0.3299, "small"),
                                              (0.33, "medium"), (0.4739, "medium"), (0.474, "large"),
                                              (-0.147, "small"), (-1.0, "large")])
    def test_magnitude_boundaries(self, delta, label):
        assert magnitude(delta) == label

    def test_empty(self):
        with pytest.raises(ValueError):
            cliffs_delta([], [1])

    @settings(max_examples=300)
    @given(st.lists(st.integers(-5, 5), min_size=1, max_size=12), st.lists(st.integers(-5, 5), min_size=1,
                                                                           max_size=12))
    def test_against_counting_oracle(self, xs, ys):
        d = cliffs_delta(xs, ys).delta
        assert d == pytest.approx(oracles.cliffs_delta(xs, ys), abs=1e-12)
        assert cliffs_delta(ys, xs).delta == pytest.approx(-d, abs=1e-12)
        assert -1 <= d <= 1


class TestCorrelation:
    def test_examples(self):
        assert spearman([1, 2, 3], [1, 2, 3]) == 1.0 and kendall([1, 2, 3], [1, 2, 3]) == 1.0
        assert spearman([1, 2, 3], [3, 2, 1]) == -1.0 and kendall([1, 2, 3], [3, 2, 1]) == -1.0
        assert kendall([1, 2, 3], [2, 1, 3]) == pytest.approx(1 / 3)

    def test_constant_vector(self):
        with pytest.raises(ValueError):
            spearman([1, 1, 1], [1, 2, 3])
        with pytest.raises(ValueError):
            kendall([1, 2, 3], [4, 4, 4])
        with pytest.raises(ValueError):
            kendall([1], [1])

    @settings(max_examples=300)
    @given(st.lists(st.tuples(st.integers(0, 4), st.floats(-10, 10)), min_size=2, max_size=15))
    def test_against_oracles(self, pairs):
        xs = [p[0] for p in pairs]
        ys = [p[1] for p in pairs]
        rho = oracles.spearman(xs, ys)
        tau = oracles.kendall_tau_b(xs, ys)
        if rho is None:
            with pytest.raises(ValueError):
                spearman(xs, ys)
        else:
            assert spearman(xs, ys) == pytest.approx(rho, abs=1e-12)
        if tau is None:
            with pytest.raises(ValueError):
                kendall(xs, ys)
        else:
            assert kendall(xs, ys) == pytest.approx(tau, abs=1e-12)


class TestScottKnott:
    def test_two_separated_models(self):
        g = scott_knott_esd(matrix([[0.9] * 30, [0.1] * 30]))
        assert g.group == {"M0": 1, "M1": 2}
        assert g.mean_rank == {"M0": 1.0, "M1": 2.0}

    def test_identical_models_share_group(self):
        g = scott_knott_esd(matrix([[0.1, 0.5, 0.3], [0.1, 0.5, 0.3]]))
        assert g.group == {"M0": 1, "M1": 1}

    def test_interleaved_pair_beats_third(self):
        a = [0.9 if j % 2 else 0.8 for j in range(20)]
        b = [0.8 if j % 2 else 0.9 for j in range(20)]
        c = [0.1] * 20
        g = scott_knott_esd(PerformanceMatrix(("A", "B", "C"), [f"d{j}" for j in range(20)], (a, b, c)))
        assert g.group == {"A": 1, "B": 1, "C": 2}
        assert g.groups() == [["A", "B"], ["C"]]

    def test_polarity(self):
        g = scott_knott_esd(matrix([[0.0] * 5, [0.4] * 5], higher=False))
        assert g.group == {"M0": 1, "M1": 2}

    def test_rows_sorted_by_mean_rank(self):
        g = scott_knott_esd(matrix([[0.1] * 4, [0.9] * 4, [0.5] * 4]))
        assert [r["model"] for r in g.rows()] == ["M1", "M2", "M0"]
        assert [r["group"] for r in g.rows()] == [1, 2, 3]

    def test_preconditions(self):
        with pytest.raises(ValueError):
            scott_knott_esd(matrix([[0.1, 0.2]]))
        with pytest.raises(ValueError):
            scott_knott_esd(matrix([[0.1], [0.2]]))

    @settings(max_examples=150, deadline=None)
    @given(st.integers(2, 9), st.integers(2, 12), st.integers(0, 100_000))
    def test_invariants(self, m, d, seed):
        rng = np.random.default_rng(seed)
        skill = rng.normal(0, rng.uniform(0, 2), m)
        values = skill[:, None] + rng.normal(0, 1, (m, d))
        values = np.round(values, int(rng.integers(0, 3)))
        mat = matrix(values.tolist())
        g = scott_knott_esd(mat)
        means = [g.mean_rank[name] for name in g.models]
        assert means == sorted(means)
        groups = [g.group[name] for name in g.models]
        assert groups[0] == 1 and all(b - a in (0, 1) for a, b in zip(groups, groups[1:]))
        members = g.groups()
        index = {name: i for i, name in enumerate(mat.models)}
        for left, right in zip(members, members[1:]):
            lr = g.ranks.ranks[[index[n] for n in left]].ravel()
            rr = g.ranks.ranks[[index[n] for n in right]].ravel()
            assert abs(oracles.cliffs_delta(lr.tolist(), rr.tolist())) >= 0.147
        # strictly monotone transform of one dataset column changes nothing
        warped = values.copy()
        j = int(rng.integers(0, d))
        warped[:, j] = np.exp(warped[:, j]) * 5 - 2
        assert scott_knott_esd(matrix(warped.tolist())).group == g.group


def test_delta_matrix_antisymmetric():
    ranks = rank_transform(matrix([[0.9, 0.8, 0.7], [0.1, 0.2, 0.9], [0.5, 0.5, 0.5]]))
    out = delta_matrix(ranks)
    np.testing.assert_allclose(out, -out.T)
    assert out[0, 1] < 0 and math.isclose(out[1, 1], 0.0)
