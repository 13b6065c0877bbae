"""Space constructions, metric axioms, and measure bookkeeping."""

import numpy as np
import pytest

from owdist import (
    ContractError,
    build_graph_space,
    build_point_cloud_space,
    build_sphere_space,
    explicit_space,
    make_measure,
    uniform_measure,
)
from owdist.metric import check_triangle_inequality

from conftest import random_connected_graph_space


class TestPointCloud:
    def test_3_4_5_triangle(self):
        s = build_point_cloud_space([(0, 0), (3, 4)])
        assert s.dist(0, 1) == 5.0

    def test_single_point(self):
        s = build_point_cloud_space([(1.0, 2.0, 3.0)])
        assert s.size == 1
        assert s.dist(0, 0) == 0.0

    def test_triangle_inequality_all_triples(self, rng):
        s = build_point_cloud_space(rng.random((10, 2)))
        d = s.dmat
        for i in range(10):
            for j in range(10):
                for k in range(10):
                    assert d[i, k] <= d[i, j] + d[j, k] + 1e-9

    def test_flat_list_is_a_line(self):
        s = build_point_cloud_space([0.0, 1.0, 4.0])
        assert s.dist(0, 2) == 4.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            build_point_cloud_space([])

    def test_ragged_rejected(self):
        with pytest.raises(ValueError, match="ragged"):
            build_point_cloud_space([[0.0, 1.0], [2.0]])

    def test_symmetry_and_diagonal(self, unit_square_space):
        d = unit_square_space.dmat
        assert np.array_equal(d, d.T)
        assert np.diagonal(d).max() == 0.0

    def test_immutable(self, unit_square_space):
        with pytest.raises(ValueError):
            unit_square_space.dmat[0, 1] = 7.0


class TestGraphSpace:
    def test_path_graph(self):
        s = build_graph_space(3, [(0, 1, 1.0), (1, 2, 1.0)])
        assert s.dist(0, 2) == 2.0

    def test_shortcut_beats_heavy_edge(self):
        # Two routes from 0 to 2: direct edge of weight 5, or 1 + 1 = 2.
        s = build_graph_space(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 5.0)])
        assert s.dist(0, 2) == 2.0

    def test_complete_graph_unit_weights(self):
        n = 6
        edges = [(i, j, 1.0) for i in range(n) for j in range(i + 1, n)]
        s = build_graph_space(n, edges)
        off = ~np.eye(n, dtype=bool)
        assert np.all(s.dmat[off] == 1.0)

    def test_disconnected_names_pair(self):
        with pytest.raises(ContractError, match=r"no path between nodes \d+ and \d+"):
            build_graph_space(4, [(0, 1, 1.0), (2, 3, 1.0)])

    def test_tree_matches_path_sums(self, rng):
        # Dyadic weights make the path sums exact in floating point.
        n = 25
        parent = {v: int(rng.integers(0, v)) for v in range(1, n)}
        weight = {v: 0.25 * int(rng.integers(1, 9)) for v in range(1, n)}
        s = build_graph_space(n, [(parent[v], v, weight[v]) for v in range(1, n)])

        def path_to_root(v):
            out = []
            while v != 0:
                out.append(v)
                v = parent[v]
            return out

        for i in range(n):
            for j in range(n):
                pi, pj = path_to_root(i), path_to_root(j)
                common = set(pi) & set(pj)
                total = sum(weight[v] for v in pi if v not in common)
                total += sum(weight[v] for v in pj if v not in common)
                assert s.dist(i, j) == total

    def test_bad_edges_rejected(self):
        with pytest.raises(ValueError, match="nonpositive weight"):
            build_graph_space(2, [(0, 1, 0.0)])
        with pytest.raises(ValueError, match="out of range"):
            build_graph_space(2, [(0, 5, 1.0)])
        with pytest.raises(ValueError, match="self-loop"):
            build_graph_space(2, [(0, 0, 1.0)])

    def test_random_graph_triangle_inequality(self, rng):
        s = random_connected_graph_space(rng, 20)
        assert check_triangle_inequality(s) <= 1e-9


class TestSphereSpace:
    def test_antipodal(self):
        s = build_sphere_space([(1.0, 0.0, 0.0), (-1.0, 0.0, 0.0)])
        assert s.dist(0, 1) == pytest.approx(np.pi, abs=1e-15)

    def test_orthogonal(self):
        s = build_sphere_space([(1.0, 0.0), (0.0, 1.0)])
        assert s.dist(0, 1) == pytest.approx(np.pi / 2, abs=1e-15)

    def test_identical_vectors(self, rng):
        v = rng.standard_normal(4)
        v /= np.linalg.norm(v)
        s = build_sphere_space([v, v])
        assert s.dist(0, 1) == 0.0

    def test_unit_norm_invariant(self, rng):
        vecs = rng.standard_normal((15, 3))
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        s = build_sphere_space(vecs)
        assert np.abs(np.linalg.norm(s.coords, axis=1) - 1.0).max() <= 1e-12

    def test_norm_deviation_rejected(self):
        with pytest.raises(ValueError, match="deviating"):
            build_sphere_space([(1.0, 0.0), (0.0, 1.001)])

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError, match="zero vector"):
            build_sphere_space([(0.0, 0.0)])

    def test_triangle_inequality(self, rng):
        vecs = rng.standard_normal((12, 3))
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        assert check_triangle_inequality(build_sphere_space(vecs)) <= 1e-9


class TestExplicitSpace:
    def test_roundtrip(self):
        d = np.array([[0.0, 1.0], [1.0, 0.0]])
        s = explicit_space(d)
        assert s.dist(0, 1) == 1.0

    def test_asymmetric_rejected(self):
        with pytest.raises(ContractError, match="symmetric"):
            explicit_space([[0.0, 1.0], [2.0, 0.0]])

    def test_triangle_violation_rejected(self):
        d = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], dtype=float)
        with pytest.raises(ContractError, match="triangle"):
            explicit_space(d)


class TestMeasures:
    def test_uniform_two(self, unit_square_space):
        mu = uniform_measure(unit_square_space, [0, 1])
        assert np.array_equal(mu.weights, [0.5, 0.5])

    def test_duplicates_merge(self, unit_square_space):
        mu = uniform_measure(unit_square_space, [0, 0, 1])
        assert np.array_equal(mu.indices, [0, 1])
        assert mu.weights == pytest.approx([2 / 3, 1 / 3], abs=1e-15)

    def test_uniform_all(self, unit_square_space):
        n = unit_square_space.size
        mu = uniform_measure(unit_square_space, range(n))
        assert np.all(mu.weights == 1.0 / n)

    def test_out_of_range_rejected(self, unit_square_space):
        with pytest.raises(ValueError, match="out of range"):
            uniform_measure(unit_square_space, [0, 99])

    def test_weights_renormalize_exactly(self, rng, unit_square_space):
        for _ in range(20):
            k = int(rng.integers(1, 20))
            idx = rng.integers(0, unit_square_space.size, size=k)
            w = rng.random(k) + 0.01
            mu = make_measure(unit_square_space, idx, w, normalize=True)
            assert abs(mu.weights.sum() - 1.0) <= 1e-12
            assert (mu.weights > 0).all()
            assert len(np.unique(mu.indices)) == len(mu.indices)

    def test_bad_sum_rejected(self, unit_square_space):
        with pytest.raises(ContractError, match="sum"):
            make_measure(unit_square_space, [0, 1], [0.5, 0.6])

    def test_negative_weight_rejected(self, unit_square_space):
        with pytest.raises(ContractError, match="nonnegative"):
            make_measure(unit_square_space, [0, 1], [1.5, -0.5])
