"""Estimator properties: the lower bound, pseudo-metric axioms,
monotonicity, tightness on two-point supports, covers and quantization."""

import numpy as np
import pytest

from owdist import (
    ContractError,
    build_point_cloud_space,
    exact_wasserstein,
    explicit_space,
    farthest_point_cover,
    greedy_delta_cover,
    nested_anchored_sets,
    make_measure,
    owd_estimate,
    quantize_measure,
    quantized_distance_error,
    sample_anchored_set,
    uniform_measure,
)
from owdist.observables import ObservableSet, distance_observable

from conftest import random_connected_graph_space, random_measure, random_sphere_space


class TestEstimator:
    def test_identical_measures_zero(self, rng, unit_square_space):
        mu = random_measure(rng, unit_square_space)
        s = sample_anchored_set(unit_square_space, np.arange(30), 2, 8, seed=1)
        for mode in ("sup", "avg"):
            assert owd_estimate(mu, mu, 1, s, mode=mode).value == 0.0

    def test_two_point_hand_computation(self):
        # mu = delta_a, nu = delta_b at distance 3; f_a pushes them to
        # delta_0 and delta_3, so the estimate equals w_p exactly.
        space = explicit_space([[0.0, 3.0], [3.0, 0.0]])
        mu = uniform_measure(space, [0])
        nu = uniform_measure(space, [1])
        s = ObservableSet(observables=(distance_observable(0),))
        for p in (1, 2, 3):
            res = owd_estimate(mu, nu, p, s)
            assert res.value == 3.0
            assert res.argmax_observable == 0

    def test_sup_is_max_and_argmax(self, rng, unit_square_space):
        mu = random_measure(rng, unit_square_space)
        nu = random_measure(rng, unit_square_space)
        s = sample_anchored_set(unit_square_space, np.arange(30), 1, 12, seed=5)
        res = owd_estimate(mu, nu, 2, s)
        assert res.value == res.per_observable.max()
        assert res.per_observable[res.argmax_observable] == res.value

    def test_avg_is_power_mean_and_below_sup(self, rng, unit_square_space):
        mu = random_measure(rng, unit_square_space)
        nu = random_measure(rng, unit_square_space)
        s = sample_anchored_set(unit_square_space, np.arange(30), 1, 12, seed=6)
        sup = owd_estimate(mu, nu, 1, s)
        for q in (1.0, 2.0):
            avg = owd_estimate(mu, nu, 1, s, mode="avg", q=q)
            expected = float(np.mean(avg.per_observable**q) ** (1 / q))
            assert avg.value == pytest.approx(expected, abs=1e-15)
            assert avg.value <= sup.value + 1e-12
            assert avg.argmax_observable is None

    def test_lower_bound_across_kinds(self, rng):
        spaces = [
            build_point_cloud_space(rng.random((18, 2))),
            random_connected_graph_space(rng, 15),
            random_sphere_space(rng, 16),
        ]
        for space in spaces:
            pool = np.arange(space.size)
            for _ in range(15):
                mu = random_measure(rng, space)
                nu = random_measure(rng, space)
                s = sample_anchored_set(space, pool, 2, 8, seed=int(rng.integers(1 << 30)))
                for p in (1, 2):
                    est = owd_estimate(mu, nu, p, s).value
                    exact = exact_wasserstein(space, mu, nu, p)[0]
                    assert est <= exact + 1e-9

    def test_pseudometric_with_fixed_set(self, rng, unit_square_space):
        s = sample_anchored_set(unit_square_space, np.arange(30), 2, 10, seed=11)
        a, b, c = (random_measure(rng, unit_square_space) for _ in range(3))
        for p in (1, 2):
            dab = owd_estimate(a, b, p, s).value
            dba = owd_estimate(b, a, p, s).value
            dbc = owd_estimate(b, c, p, s).value
            dac = owd_estimate(a, c, p, s).value
            assert dab == dba  # 1D distance is symmetric, so the max is too
            assert dac <= dab + dbc + 1e-9
            assert owd_estimate(a, a, p, s).value == 0.0

    def test_monotone_in_observable_set(self, rng, unit_square_space):
        mu = random_measure(rng, unit_square_space)
        nu = random_measure(rng, unit_square_space)
        small = sample_anchored_set(unit_square_space, np.arange(30), 1, 6, seed=2)
        extra = sample_anchored_set(unit_square_space, np.arange(30), 3, 6, seed=3)
        big = small.union(extra)
        assert owd_estimate(mu, nu, 1, small).value <= owd_estimate(mu, nu, 1, big).value

    def test_nested_sets_are_nested_and_monotone(self, rng, unit_square_space):
        sets = nested_anchored_sets(unit_square_space, np.arange(30), [0, 2, 4], 6, seed=9)
        assert [len(s) for s in sets] == [6, 12, 18]
        assert all(f.order == 0 for f in sets[0])
        mu = random_measure(rng, unit_square_space)
        nu = random_measure(rng, unit_square_space)
        vals = [owd_estimate(mu, nu, 1, s).value for s in sets]
        assert vals[0] <= vals[1] <= vals[2]

    def test_p_chain(self, rng, unit_square_space):
        s = sample_anchored_set(unit_square_space, np.arange(30), 2, 8, seed=21)
        for _ in range(10):
            mu = random_measure(rng, unit_square_space)
            nu = random_measure(rng, unit_square_space)
            assert (
                owd_estimate(mu, nu, 1, s).value
                <= owd_estimate(mu, nu, 2, s).value + 1e-12
            )

    def test_thread_count_invisible(self, rng, unit_square_space):
        mu = random_measure(rng, unit_square_space)
        nu = random_measure(rng, unit_square_space)
        s = sample_anchored_set(unit_square_space, np.arange(30), 2, 16, seed=4)
        r1 = owd_estimate(mu, nu, 2, s, threads=1)
        r4 = owd_estimate(mu, nu, 2, s, threads=4)
        assert np.array_equal(r1.per_observable, r4.per_observable)
        assert r1.value == r4.value

    def test_mismatched_spaces_rejected(self, rng, unit_square_space):
        other = build_point_cloud_space(rng.random((5, 2)))
        s = sample_anchored_set(unit_square_space, np.arange(30), 0, 2, seed=0)
        mu = uniform_measure(unit_square_space, [0])
        nu = uniform_measure(other, [0])
        with pytest.raises(ValueError, match="same space"):
            owd_estimate(mu, nu, 1, s)

    def test_result_json_fields(self, rng, unit_square_space):
        mu = random_measure(rng, unit_square_space)
        nu = random_measure(rng, unit_square_space)
        s = sample_anchored_set(unit_square_space, np.arange(30), 0, 3, seed=0)
        blob = owd_estimate(mu, nu, 1, s).to_json()
        assert set(blob) == {"value", "mode", "p", "q", "per_observable", "argmax_observable"}
        assert len(blob["per_observable"]) == 3


class TestCovers:
    def test_huge_delta_single_anchor(self, unit_square_space):
        cover = greedy_delta_cover(unit_square_space, unit_square_space.diameter() + 1.0)
        assert list(cover.anchor_indices) == [0]

    def test_tiny_delta_all_anchors(self, unit_square_space):
        gaps = unit_square_space.dmat[unit_square_space.dmat > 0]
        cover = greedy_delta_cover(unit_square_space, 0.5 * gaps.min())
        assert len(cover.anchor_indices) == unit_square_space.size

    def test_unit_path_every_other_node(self):
        g = __import__("owdist").build_graph_space(6, [(i, i + 1, 1.0) for i in range(5)])
        cover = greedy_delta_cover(g, 1.5)
        assert list(cover.anchor_indices) == [0, 2, 4]

    def test_greedy_cover_properties(self, rng, unit_square_space):
        for delta in (0.1, 0.25, 0.5):
            cover = greedy_delta_cover(unit_square_space, delta)
            sub = unit_square_space.dmat[cover.anchor_indices]
            assert (sub.min(axis=0) < delta).all()
            pair = sub[:, cover.anchor_indices]
            off = ~np.eye(len(cover.anchor_indices), dtype=bool)
            assert (pair[off] >= delta).all()

    def test_farthest_point_cover_valid(self, unit_square_space):
        cover = farthest_point_cover(unit_square_space, 0.3)
        sub = unit_square_space.dmat[cover.anchor_indices]
        assert (sub.min(axis=0) < 0.3).all()
        assert cover.kind == "farthest-point"

    def test_bad_delta_rejected(self, unit_square_space):
        with pytest.raises(ValueError, match="positive"):
            greedy_delta_cover(unit_square_space, 0.0)


class TestQuantization:
    def test_measure_on_anchors_unchanged(self, rng, unit_square_space):
        cover = greedy_delta_cover(unit_square_space, 0.3)
        mu = uniform_measure(unit_square_space, cover.anchor_indices[:3])
        out = quantize_measure(mu, cover)
        assert np.array_equal(out.indices, mu.indices)
        assert np.array_equal(out.weights, mu.weights)

    def test_single_atom_moves_its_distance(self):
        s = build_point_cloud_space([0.0, 0.3, 1.0])
        cover = greedy_delta_cover(s, 0.5)
        assert list(cover.anchor_indices) == [0, 2]
        mu = uniform_measure(s, [1])
        out = quantize_measure(mu, cover)
        assert list(out.indices) == [0]
        assert exact_wasserstein(s, mu, out, 1)[0] == pytest.approx(0.3, abs=1e-12)

    def test_quantization_moves_less_than_delta(self, rng):
        for _ in range(10):
            space = build_point_cloud_space(rng.random((50, 2)))
            cover = greedy_delta_cover(space, 0.2)
            mu = random_measure(rng, space)
            mu_hat = quantize_measure(mu, cover)
            assert set(mu_hat.indices) <= set(cover.anchor_indices)
            for p in (1, 2):
                assert exact_wasserstein(space, mu, mu_hat, p)[0] < 0.2

    def test_stability_two_delta(self, rng):
        for _ in range(10):
            space = build_point_cloud_space(rng.random((40, 2)))
            delta = float(0.1 + 0.2 * rng.random())
            cover = greedy_delta_cover(space, delta)
            s = sample_anchored_set(space, cover.anchor_indices, 2, 10,
                                    seed=int(rng.integers(1 << 30)))
            mu = random_measure(rng, space)
            nu = random_measure(rng, space)
            dhat, d = quantized_distance_error(mu, nu, 1, cover, s)
            assert abs(d - dhat) <= 2 * delta + 1e-9

    def test_already_quantized_error_zero(self, rng, unit_square_space):
        cover = greedy_delta_cover(unit_square_space, 0.4)
        s = sample_anchored_set(unit_square_space, cover.anchor_indices, 1, 6, seed=3)
        mu = uniform_measure(unit_square_space, cover.anchor_indices[:2])
        nu = uniform_measure(unit_square_space, cover.anchor_indices[-2:])
        dhat, d = quantized_distance_error(mu, nu, 1, cover, s)
        assert dhat == d
