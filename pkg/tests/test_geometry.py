import numpy as np
import pytest

from geminiclust import DimensionMismatch, GeometryMatrix, GeometrySpec
from geminiclust.geometry import (
    build_distance,
    build_kernel,
    hop_matrix_numpy,
    load_geometry_csv,
    neighbor_threshold,
    shortest_path_distance,
    squared_distances,
    _hop_matrix,
)


class TestKernels:
    def test_linear_two_points(self):
        g = build_kernel([[1.0], [-1.0]], GeometrySpec("linear_kernel"))
        np.testing.assert_allclose(g.values, [[1, -1], [-1, 1]])

    def test_gaussian_diagonal_is_one(self):
        x = np.random.default_rng(0).normal(size=(7, 3))
        g = build_kernel(x, GeometrySpec("gaussian_kernel", bandwidth=0.7))
        np.testing.assert_array_equal(np.diag(g.values), np.ones(7))
        assert g.values.min() > 0 and g.values.max() <= 1

    def test_gaussian_scalar_value(self):
        g = build_kernel([[0.0], [2.0]], GeometrySpec("gaussian_kernel", bandwidth=2.0))
        np.testing.assert_allclose(g.values[0, 1], np.exp(-0.5), rtol=1e-12)

    def test_kernel_psd_rayleigh(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(40, 5))
        for spec in (GeometrySpec("linear_kernel"), GeometrySpec("gaussian_kernel", bandwidth=1.3)):
            g = build_kernel(x, spec).values
            for _ in range(100):
                v = rng.normal(size=40)
                v /= np.linalg.norm(v)
                assert v @ g @ v >= -1e-8

    def test_symmetry(self):
        x = np.random.default_rng(1).normal(size=(30, 4))
        for builder, spec in (
            (build_kernel, GeometrySpec("linear_kernel")),
            (build_kernel, GeometrySpec("gaussian_kernel", bandwidth=2.0)),
            (build_distance, GeometrySpec("euclidean_distance")),
        ):
            v = builder(x, spec).values
            assert np.max(np.abs(v - v.T)) <= 1e-9


class TestDistances:
    def test_euclidean_pair(self):
        d = build_distance([[0.0], [3.0]], GeometrySpec("euclidean_distance"))
        np.testing.assert_allclose(d.values, [[0, 3], [3, 0]])

    def test_identical_rows_zero(self):
        d = build_distance([[1.0, 2.0]] * 4, GeometrySpec("euclidean_distance"))
        np.testing.assert_array_equal(d.values, np.zeros((4, 4)))

    def test_three_four_five(self):
        d = build_distance([[0.0, 0.0], [3.0, 4.0]], GeometrySpec("euclidean_distance"))
        np.testing.assert_allclose(d.values[0, 1], 5.0)

    def test_precomputed_shape_mismatch(self):
        spec = GeometrySpec("precomputed", matrix=np.zeros((3, 3)))
        with pytest.raises(DimensionMismatch):
            build_distance(np.zeros((4, 2)), spec)


class TestShortestPath:
    def test_chain_hop_counts(self):
        # threshold admits only consecutive edges
        x = np.array([[0.0], [1.0], [2.0]])
        d = shortest_path_distance(x, quantile=0.4)
        assert d.values[0, 2] == 2 and d.values[0, 1] == 1

    def test_fully_connected(self):
        x = np.array([[0.0], [0.1], [0.2]])
        d = shortest_path_distance(x, quantile=0.99)
        off = d.values[~np.eye(3, dtype=bool)]
        assert set(off.tolist()) == {1.0}

    def test_unreachable_sentinel(self):
        x = np.array([[0.0], [1.0], [2.0], [10.0]])
        d = shortest_path_distance(x, quantile=0.35)
        assert d.values[0, 3] == 4.0  # sentinel = N
        assert d.values[0, 2] == 2.0

    def test_entries_are_integers_in_range(self):
        x = np.random.default_rng(5).normal(size=(30, 2))
        v = shortest_path_distance(x, 0.1).values
        assert np.array_equal(v, np.rint(v))
        assert v.min() >= 0 and v.max() <= 30

    def test_triangle_inequality(self):
        # v[i, j] <= v[i, m] + v[m, j] for every midpoint, exhaustively;
        # the sentinel value N never undercuts a genuine hop count.
        rng = np.random.default_rng(7)
        x = rng.normal(size=(50, 2))
        v = shortest_path_distance(x, 0.08).values
        for m in range(50):
            assert np.all(v <= v[:, [m]] + v[[m], :] + 1e-12)

    def test_quantile_excludes_diagonal(self):
        x = np.array([[0.0], [1.0], [2.0]])
        d = np.sqrt(squared_distances(x))
        # off-diagonal distances are [1,1,2,2,1,1]; including the zero
        # diagonal would drag low quantiles to 0
        assert neighbor_threshold(d, 0.1) > 0

    def test_jit_and_numpy_paths_identical(self):
        rng = np.random.default_rng(11)
        x = rng.normal(size=(40, 2))
        d = np.sqrt(squared_distances(x))
        adj = (d <= neighbor_threshold(d, 0.12)) & ~np.eye(40, dtype=bool)
        np.testing.assert_array_equal(_hop_matrix(adj), hop_matrix_numpy(adj))


class TestGeometryMatrix:
    def test_distance_tag_rejects_negative(self):
        with pytest.raises(ValueError):
            GeometryMatrix(np.array([[0.0, -1.0], [-1.0, 0.0]]), "distance")

    def test_kernel_tag_rejects_indefinite(self):
        with pytest.raises(ValueError):
            GeometryMatrix(np.array([[0.0, 5.0], [5.0, 0.0]]), "kernel")

    def test_csv_round_trip(self, tmp_path):
        m = np.array([[0.0, 1.5], [1.5, 0.0]])
        path = tmp_path / "d.csv"
        np.savetxt(path, m, delimiter=",")
        loaded = load_geometry_csv(path, "distance")
        np.testing.assert_allclose(loaded.values, m)
        assert loaded.tag == "distance"

    def test_csv_rejects_non_square(self, tmp_path):
        path = tmp_path / "bad.csv"
        np.savetxt(path, np.zeros((2, 3)), delimiter=",")
        with pytest.raises(DimensionMismatch):
            load_geometry_csv(path, "distance")
