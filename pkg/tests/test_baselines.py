"""Sliced/max-sliced Wasserstein and Chamfer distance."""

import numpy as np
import pytest

from owdist import (
    build_graph_space,
    build_point_cloud_space,
    chamfer,
    exact_wasserstein,
    line_measure,
    make_measure,
    sample_slices,
    sliced_wasserstein,
    uniform_measure,
    wasserstein_1d,
)
from owdist.baselines import SliceSet

from conftest import random_measure


class TestSampleSlices:
    def test_one_dimensional_is_signs(self):
        s = sample_slices(1, 20, seed=0)
        assert set(np.abs(s.directions.ravel())) == {1.0}

    def test_deterministic(self):
        a = sample_slices(3, 10, seed=42)
        b = sample_slices(3, 10, seed=42)
        assert np.array_equal(a.directions, b.directions)

    def test_unit_norm(self):
        s = sample_slices(5, 50, seed=1)
        assert np.abs(np.linalg.norm(s.directions, axis=1) - 1.0).max() <= 1e-12

    def test_mean_direction_small(self):
        s = sample_slices(3, 100, seed=7)
        assert np.linalg.norm(s.directions.mean(axis=0)) < 0.3


class TestSlicedWasserstein:
    def test_identical_measures(self, rng, unit_square_space):
        mu = random_measure(rng, unit_square_space)
        s = sample_slices(2, 10, seed=0)
        assert sliced_wasserstein(mu, mu, 1, s) == 0.0

    def test_point_masses_along_included_direction(self):
        space = build_point_cloud_space([(0.0, 0.0), (3.0, 4.0)])
        mu = uniform_measure(space, [0])
        nu = uniform_measure(space, [1])
        gap = np.array([3.0, 4.0]) / 5.0
        slices = SliceSet(directions=np.vstack([gap, [1.0, 0.0]]))
        assert sliced_wasserstein(mu, nu, 1, slices, mode="max") == pytest.approx(5.0, abs=1e-12)

    def test_axis_aligned_reduces_to_1d(self, rng):
        xs = rng.standard_normal(12)
        pts = np.column_stack([xs, np.zeros(12)])
        space = build_point_cloud_space(pts)
        mu = uniform_measure(space, range(6))
        nu = uniform_measure(space, range(6, 12))
        slices = SliceSet(directions=np.array([[1.0, 0.0]]))
        expected = wasserstein_1d(line_measure(xs[:6]), line_measure(xs[6:]), 1)
        assert sliced_wasserstein(mu, nu, 1, slices) == pytest.approx(expected, abs=1e-15)

    def test_max_sliced_lower_bounds_exact(self, rng, unit_square_space):
        s = sample_slices(2, 25, seed=3)
        for _ in range(10):
            mu = random_measure(rng, unit_square_space)
            nu = random_measure(rng, unit_square_space)
            for p in (1, 2):
                v = sliced_wasserstein(mu, nu, p, s, mode="max")
                assert v <= exact_wasserstein(unit_square_space, mu, nu, p)[0] + 1e-9

    def test_mean_below_max(self, rng, unit_square_space):
        s = sample_slices(2, 25, seed=4)
        mu = random_measure(rng, unit_square_space)
        nu = random_measure(rng, unit_square_space)
        assert sliced_wasserstein(mu, nu, 1, s, mode="mean") <= sliced_wasserstein(
            mu, nu, 1, s, mode="max"
        )

    def test_non_euclidean_rejected(self):
        g = build_graph_space(3, [(0, 1, 1.0), (1, 2, 1.0)])
        mu = uniform_measure(g, [0])
        nu = uniform_measure(g, [2])
        with pytest.raises(ValueError, match="point-cloud"):
            sliced_wasserstein(mu, nu, 1, sample_slices(2, 3, seed=0))


class TestChamfer:
    def test_equal_clouds_zero(self, rng):
        pts = rng.random((20, 3))
        assert chamfer(pts, pts) == 0.0

    def test_two_singletons(self):
        assert chamfer([[0.0]], [[1.0]]) == 2.0

    def test_term_by_term(self):
        # P={0}: nearest in Q is 0 -> 0.  Q={0,3}: nearests in P are 0 and 3
        # -> 0 + 9.  Total 9.
        assert chamfer([[0.0]], [[0.0], [3.0]]) == 9.0

    def test_symmetry_exact(self, rng):
        p = rng.random((15, 2))
        q = rng.random((9, 2))
        assert chamfer(p, q) == chamfer(q, p)

    def test_zero_iff_equal_sets(self):
        p = [[0.0, 0.0], [1.0, 1.0]]
        q = [[1.0, 1.0], [0.0, 0.0]]
        assert chamfer(p, q) == 0.0
        assert chamfer(p, [[0.0, 0.0], [1.0, 1.25]]) > 0.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="nonempty"):
            chamfer(np.empty((0, 2)), [[0.0, 0.0]])

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError, match="dimension"):
            chamfer([[0.0]], [[0.0, 1.0]])
