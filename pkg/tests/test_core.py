import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geminiclust import (
    DimensionMismatch,
    EmptyCluster,
    as_soft_assignment,
    cluster_weights,
    marginal,
    nonempty_clusters,
)


def random_assignment(seed, n, k):
    return np.random.default_rng(seed).dirichlet(np.ones(k), size=n)


class TestValidation:
    def test_rejects_bad_row_sums(self):
        with pytest.raises(ValueError):
            as_soft_assignment([[0.6, 0.6], [0.5, 0.5]])

    def test_rejects_single_column(self):
        with pytest.raises(DimensionMismatch):
            as_soft_assignment([[1.0], [1.0]])

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            as_soft_assignment([[np.nan, 1.0], [0.5, 0.5]])


class TestMarginal:
    def test_one_hot_symmetric(self):
        np.testing.assert_allclose(marginal([[1, 0], [0, 1]]), [0.5, 0.5])

    def test_single_row(self):
        np.testing.assert_allclose(marginal([[0.25] * 4]), [0.25] * 4)

    def test_column_average(self):
        p = [[0.8, 0.2], [0.2, 0.8], [0.8, 0.2], [0.8, 0.2]]
        np.testing.assert_allclose(marginal(p), [0.65, 0.35])

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_row_permutation_invariance(self, seed):
        rng = np.random.default_rng(seed)
        p = rng.dirichlet(np.ones(4), size=9)
        perm = rng.permutation(9)
        np.testing.assert_allclose(marginal(p), marginal(p[perm]), atol=1e-15)


class TestClusterWeights:
    def test_one_hot(self):
        np.testing.assert_allclose(cluster_weights([[1, 0], [0, 1]], 0), [1, 0])

    def test_uniform_rows(self):
        p = np.full((5, 3), 1 / 3)
        np.testing.assert_allclose(cluster_weights(p, 1), np.full(5, 0.2))

    def test_hand_normalisation(self):
        m = cluster_weights([[0.8, 0.2], [0.4, 0.6]], 0)
        np.testing.assert_allclose(m, [2 / 3, 1 / 3])

    def test_empty_cluster_raises(self):
        p = np.column_stack([np.full(4, 1e-14), 1 - np.full(4, 1e-14)])
        with pytest.raises(EmptyCluster):
            cluster_weights(p, 0)

    @given(st.integers(0, 2**32 - 1), st.floats(0.1, 10.0))
    @settings(max_examples=25, deadline=None)
    def test_sums_to_one_and_scale_invariant(self, seed, scale):
        rng = np.random.default_rng(seed)
        p = rng.dirichlet(np.ones(3), size=8)
        for k in range(3):
            m = cluster_weights(p, k)
            assert abs(m.sum() - 1.0) <= 1e-12
            column = p[:, k]
            np.testing.assert_allclose(m, column / column.sum(), atol=1e-15)
            # self-normalisation kills any positive rescaling of the column
            scaled = scale * column
            np.testing.assert_allclose(m, scaled / scaled.sum(), atol=1e-12)


class TestNonemptyClusters:
    def test_identity_hits_all(self):
        assert nonempty_clusters(np.eye(3)) == 3

    def test_single_winner(self):
        p = np.column_stack([np.full(6, 0.9), np.full(6, 0.05), np.full(6, 0.05)])
        assert nonempty_clusters(p) == 1

    def test_tie_goes_to_lowest_index(self):
        assert nonempty_clusters([[0.5, 0.5], [0.9, 0.1]]) == 1

    @given(st.integers(0, 2**32 - 1), st.integers(2, 6))
    @settings(max_examples=25, deadline=None)
    def test_bounds(self, seed, k):
        p = random_assignment(seed, 12, k)
        assert 1 <= nonempty_clusters(p) <= k
