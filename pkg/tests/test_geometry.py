"""Hyperrectangle/Laguerre geometry: types, oracles, volumes, moments."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from boxot import fixtures as fx
from boxot.geometry import (
    BoxDensity,
    Hyperrectangle,
    Instance,
    SampleSet,
    approximate_density,
    box_moments,
    box_rng,
    box_separation_oracle,
    box_shadow_volume,
    cell_box_moments_exact,
    cell_box_volume_exact,
    cell_box_volumes_mc,
    classify_point,
    classify_points,
    instance_stats,
    laguerre_separation_oracle,
    mc_sample_count,
)


class TestHyperrectangle:
    def test_basic_properties(self):
        box = Hyperrectangle([0.0, -1.0], [1.0, 3.0])
        assert box.dimension == 2
        assert_allclose(box.widths, [1.0, 4.0])
        assert box.volume == 4.0
        assert_allclose(box.midpoint, [0.5, 1.0])

    def test_contains_is_closed(self):
        box = Hyperrectangle([0.0], [1.0])
        assert box.contains(np.array([0.0]))
        assert box.contains(np.array([1.0]))
        assert box.contains(np.array([0.5]))
        assert not box.contains(np.array([1.0000001]))

    def test_degenerate_width_raises(self):
        with pytest.raises(ValueError):
            Hyperrectangle([0.0, 0.0], [1.0, 0.0])
        with pytest.raises(ValueError):
            Hyperrectangle([1.0], [0.0])

    def test_shape_mismatch_raises(self):
        with pytest.raises(ValueError):
            Hyperrectangle([0.0, 0.0], [1.0])

    def test_max_corner_norm(self):
        assert Hyperrectangle([-2.0], [1.0]).max_corner_norm() == 2.0
        box = Hyperrectangle([-1.0, 3.0], [2.0, 4.0])
        assert_allclose(box.max_corner_norm(), np.sqrt(4.0 + 16.0))


class TestBoxDensity:
    def test_mass_must_be_one(self):
        with pytest.raises(ValueError):
            BoxDensity(dimension=1, boxes=((Hyperrectangle([0.0], [1.0]), 0.9),))

    def test_overlap_names_the_pair(self):
        boxes = (
            (Hyperrectangle([0.0], [1.0]), 0.5),
            (Hyperrectangle([0.5], [1.5]), 0.5),
        )
        with pytest.raises(ValueError, match="boxes 0 and 1"):
            BoxDensity(dimension=1, boxes=boxes)

    def test_touching_faces_are_allowed(self):
        density = BoxDensity(
            dimension=1,
            boxes=(
                (Hyperrectangle([0.0], [1.0]), 0.5),
                (Hyperrectangle([1.0], [2.0]), 0.5),
            ),
        )
        assert density.k == 2
        assert_allclose(density.total_mass, 1.0)

    def test_nonpositive_weight_raises(self):
        with pytest.raises(ValueError):
            BoxDensity(dimension=1, boxes=((Hyperrectangle([0.0], [1.0]), 0.0),))

    def test_support_bounding_box(self):
        density = BoxDensity(
            dimension=1,
            boxes=(
                (Hyperrectangle([-2.0], [-1.0]), 0.5),
                (Hyperrectangle([1.0], [2.0]), 0.5),
            ),
        )
        bb = density.support_bounding_box()
        assert_allclose(bb.lo, [-2.0])
        assert_allclose(bb.hi, [2.0])


class TestSampleSet:
    def test_uniform_demands(self):
        s = SampleSet.uniform(np.array([[0.0], [1.0], [2.0]]))
        assert_allclose(s.demands, [1 / 3, 1 / 3, 1 / 3])
        assert s.uniform_demands

    def test_demands_must_sum_to_one(self):
        with pytest.raises(ValueError):
            SampleSet(points=np.array([[0.0], [1.0]]), demands=np.array([0.5, 0.6]))

    def test_negative_demand_raises(self):
        with pytest.raises(ValueError):
            SampleSet(points=np.array([[0.0], [1.0]]), demands=np.array([-0.1, 1.1]))

    def test_duplicate_points_raise(self):
        with pytest.raises(ValueError):
            SampleSet.uniform(np.array([[0.0, 1.0], [0.0, 1.0]]))


class TestInstanceStats:
    def test_symmetric_interval_constants(self, symmetric_interval):
        stats = symmetric_interval.stats
        assert stats.N == 1.0
        assert stats.D == 1.0
        assert stats.s == 2.0
        assert stats.L == 1.0
        assert stats.reference_set_size == 4

    def test_square_diagonal_dominates(self, symmetric_square):
        stats = symmetric_square.stats
        assert_allclose(stats.D, np.sqrt(2.0))
        assert stats.s == 2.0
        assert stats.L == 2.0
        assert stats.reference_set_size == 6

    def test_corner_can_dominate_samples(self):
        density = BoxDensity(
            dimension=1, boxes=((Hyperrectangle([0.0], [3.0]), 1 / 3),)
        )
        samples = SampleSet.uniform(np.array([[0.5], [1.0]]))
        stats = instance_stats(density, samples)
        assert stats.D == 3.0
        assert stats.s == 0.5
        assert_allclose(stats.L, 2 * 2 * 1 * 1 / 0.25)

    def test_min_box_width_can_set_s(self):
        density = BoxDensity(
            dimension=2, boxes=((Hyperrectangle([0.0, 0.0], [0.1, 10.0]), 1.0),)
        )
        samples = SampleSet.uniform(np.array([[-1.0, 0.0], [1.0, 0.0]]))
        stats = instance_stats(density, samples)
        assert_allclose(stats.s, 0.1)


class TestBoxSeparationOracle:
    def test_interior_point(self):
        box = Hyperrectangle([0.0, 0.0], [1.0, 1.0])
        assert box_separation_oracle(box, np.array([0.5, 0.5])) is None

    def test_violated_upper_face(self):
        box = Hyperrectangle([0.0, 0.0], [1.0, 1.0])
        plane = box_separation_oracle(box, np.array([2.0, 0.5]))
        assert_allclose(plane.a, [1.0, 0.0])
        assert plane.beta == 1.0

    def test_violated_lower_face(self):
        box = Hyperrectangle([0.0], [1.0])
        plane = box_separation_oracle(box, np.array([-0.5]))
        assert_allclose(plane.a, [-1.0])
        assert plane.beta == 0.0

    def test_plane_separates(self):
        rng = np.random.default_rng(11)
        box = Hyperrectangle([-1.0, 0.0, 2.0], [1.0, 3.0, 4.0])
        corners = np.array(
            [[x, y, z] for x in (-1, 1) for y in (0, 3) for z in (2, 4)],
            dtype=float,
        )
        for _ in range(200):
            x = rng.uniform(-3, 6, size=3)
            plane = box_separation_oracle(box, x)
            if plane is None:
                assert box.contains(x)
            else:
                assert plane.a @ x > plane.beta
                assert (corners @ plane.a <= plane.beta + 1e-12).all()

    def test_dimension_mismatch_raises(self):
        box = Hyperrectangle([0.0], [1.0])
        with pytest.raises(ValueError):
            box_separation_oracle(box, np.array([0.5, 0.5]))


class TestLaguerreSeparationOracle:
    def test_voronoi_half_line(self):
        samples = SampleSet.uniform(np.array([[-1.0], [1.0]]))
        g = np.zeros(2)
        assert laguerre_separation_oracle(samples, g, 0, np.array([-0.5])) is None

    def test_violated_cell_gives_separator(self):
        samples = SampleSet.uniform(np.array([[-1.0], [1.0]]))
        g = np.zeros(2)
        plane = laguerre_separation_oracle(samples, g, 1, np.array([-0.5]))
        assert_allclose(plane.a, [-4.0])
        assert plane.beta == 0.0
        assert plane.a @ np.array([-0.5]) > plane.beta

    def test_bad_index_raises(self):
        samples = SampleSet.uniform(np.array([[-1.0], [1.0]]))
        with pytest.raises(ValueError):
            laguerre_separation_oracle(samples, np.zeros(2), 2, np.array([0.0]))

    def test_consistency_with_classification(self):
        rng = np.random.default_rng(5)
        samples = SampleSet.uniform(rng.uniform(-1, 1, size=(4, 2)))
        g = rng.uniform(-0.5, 0.5, size=4)
        g -= g.mean()
        for _ in range(200):
            x = rng.uniform(-2, 2, size=2)
            j_star = classify_point(samples, g, x)
            assert laguerre_separation_oracle(samples, g, j_star, x) is None
            for j in range(4):
                plane = laguerre_separation_oracle(samples, g, j, x)
                if plane is not None:
                    assert j != j_star
                    assert plane.a @ x > plane.beta


class TestClassifyPoint:
    def test_nearer_site_wins(self):
        samples = SampleSet.uniform(np.array([[-1.0], [1.0]]))
        assert classify_point(samples, np.zeros(2), np.array([0.3])) == 1

    def test_tie_breaks_to_smallest_index(self):
        samples = SampleSet.uniform(np.array([[-1.0], [1.0]]))
        assert classify_point(samples, np.zeros(2), np.array([0.0])) == 0

    def test_weights_move_the_boundary(self):
        samples = SampleSet.uniform(np.array([[-1.0], [1.0]]))
        g = np.array([0.0, 0.5])
        # boundary sits at x = -1/8
        assert classify_point(samples, g, np.array([-0.2])) == 0
        assert classify_point(samples, g, np.array([-0.1])) == 1

    def test_vectorized_matches_scalar(self):
        rng = np.random.default_rng(3)
        samples = SampleSet.uniform(rng.uniform(-1, 1, size=(5, 3)))
        g = rng.uniform(-0.3, 0.3, size=5)
        xs = rng.uniform(-2, 2, size=(50, 3))
        vec = classify_points(samples, g, xs)
        scalar = [classify_point(samples, g, x) for x in xs]
        assert (vec == scalar).all()


class TestMcVolumes:
    def test_symmetric_split(self):
        samples = SampleSet.uniform(np.array([[-1.0], [1.0]]))
        box = Hyperrectangle([-1.0], [1.0])
        v = cell_box_volumes_mc(samples, np.zeros(2), box, 0.01, 0.05, seed=0)
        assert_allclose(v, [1.0, 1.0], atol=0.02)

    def test_single_cell_has_no_variance(self):
        samples = SampleSet.uniform(np.array([[0.3, 0.3]]))
        box = Hyperrectangle([0.0, 0.0], [1.0, 1.0])
        v = cell_box_volumes_mc(samples, np.zeros(1), box, 0.05, 0.05, seed=9)
        assert_allclose(v, [1.0])

    def test_shifted_boundary(self):
        samples = SampleSet.uniform(np.array([[-1.0], [1.0]]))
        box = Hyperrectangle([-1.0], [1.0])
        v = cell_box_volumes_mc(samples, np.array([0.0, 0.5]), box, 0.01, 0.05, seed=1)
        assert_allclose(v[0], 0.875, atol=0.02)

    def test_deterministic_per_seed_and_box_index(self):
        samples = SampleSet.uniform(np.array([[-1.0], [1.0]]))
        box = Hyperrectangle([-1.0], [1.0])
        a = cell_box_volumes_mc(samples, np.zeros(2), box, 0.01, 0.1, seed=4)
        b = cell_box_volumes_mc(samples, np.zeros(2), box, 0.01, 0.1, seed=4)
        c = cell_box_volumes_mc(
            samples, np.zeros(2), box, 0.01, 0.1, seed=4, box_index=1
        )
        assert (a == b).all()
        assert (a != c).any()

    def test_substream_rule_is_stable(self):
        # the per-box stream is pinned to (seed, box_index), not call order
        first = box_rng(7, 2).uniform(size=3)
        again = box_rng(7, 2).uniform(size=3)
        other = box_rng(7, 3).uniform(size=3)
        assert (first == again).all()
        assert (first != other).any()

    def test_sample_count_formula(self):
        m = mc_sample_count(2, 0.01, 0.05)
        assert m == int(np.ceil(np.log(2 * 2 / 0.05) / (2 * 0.01**2)))
        with pytest.raises(ValueError):
            mc_sample_count(2, 0.0, 0.05)
        with pytest.raises(ValueError):
            mc_sample_count(2, 0.01, 1.5)

    def test_non_finite_weights_raise(self):
        samples = SampleSet.uniform(np.array([[-1.0], [1.0]]))
        box = Hyperrectangle([-1.0], [1.0])
        with pytest.raises(ValueError):
            cell_box_volumes_mc(samples, np.array([np.nan, 0.0]), box, 0.05, 0.1, 0)


class TestExactCellMoments1d:
    def test_interval_split_moments(self):
        samples = SampleSet.uniform(np.array([[-1.0], [1.0]]))
        box = Hyperrectangle([-1.0], [1.0])
        vols, firsts, seconds = cell_box_moments_exact(
            samples, np.array([0.0, 0.5]), box
        )
        # boundary at -1/8
        assert_allclose(vols, [0.875, 1.125])
        assert_allclose(firsts[:, 0], [(0.125**2 - 1) / 2, (1 - 0.125**2) / 2])
        assert_allclose(seconds, [(1 - 0.125**3) / 3, (1 + 0.125**3) / 3])

    def test_empty_cell(self):
        samples = SampleSet.uniform(np.array([[0.0], [10.0]]))
        box = Hyperrectangle([-1.0], [1.0])
        vols, _, _ = cell_box_moments_exact(samples, np.zeros(2), box)
        assert vols[1] == 0.0
        assert_allclose(vols[0], 2.0)


class TestExactCellMoments2d:
    def test_half_square_moments(self, symmetric_square):
        samples = symmetric_square.samples
        box = symmetric_square.density.boxes[0][0]
        vols, firsts, seconds = cell_box_moments_exact(samples, np.zeros(2), box)
        assert_allclose(vols, [2.0, 2.0])
        assert_allclose(firsts, [[-1.0, 0.0], [1.0, 0.0]], atol=1e-12)
        assert_allclose(seconds, [4 / 3, 4 / 3])

    def test_partition_of_box(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            samples = SampleSet.uniform(rng.uniform(-1.5, 1.5, size=(4, 2)))
            g = rng.uniform(-0.4, 0.4, size=4)
            box = Hyperrectangle([-1.0, -0.5], [0.5, 1.5])
            vols = [cell_box_volume_exact(samples, g, j, box) for j in range(4)]
            assert abs(sum(vols) - box.volume) <= 1e-9

    def test_matches_mc(self):
        rng = np.random.default_rng(8)
        samples = SampleSet.uniform(rng.uniform(-1, 1, size=(3, 2)))
        g = np.array([0.1, -0.2, 0.1])
        box = Hyperrectangle([-1.0, -1.0], [1.0, 1.0])
        exact = np.array(
            [cell_box_volume_exact(samples, g, j, box) for j in range(3)]
        )
        mc = cell_box_volumes_mc(samples, g, box, 0.01, 0.01, seed=2)
        assert np.abs(mc - exact).max() <= 0.01 * box.volume


class TestExactCellMoments3d:
    def test_axis_aligned_split(self):
        samples = SampleSet.uniform(np.array([[0.25, 0.5, 0.5], [0.75, 0.5, 0.5]]))
        box = Hyperrectangle([0.0, 0.0, 0.0], [1.0, 1.0, 1.0])
        vols, firsts, seconds = cell_box_moments_exact(samples, np.zeros(2), box)
        assert_allclose(vols, [0.5, 0.5], atol=1e-9)
        assert_allclose(firsts, [[0.125, 0.25, 0.25], [0.375, 0.25, 0.25]], atol=1e-9)
        assert_allclose(seconds, [0.375, 0.625], atol=1e-9)

    def test_diagonal_split_is_symmetric(self):
        samples = SampleSet.uniform(np.array([[0.2, 0.2, 0.2], [0.8, 0.8, 0.8]]))
        box = Hyperrectangle([0.0, 0.0, 0.0], [1.0, 1.0, 1.0])
        vols, _, _ = cell_box_moments_exact(samples, np.zeros(2), box)
        assert_allclose(vols, [0.5, 0.5], atol=1e-9)

    def test_partition_and_mc_agreement(self):
        rng = np.random.default_rng(13)
        for _ in range(5):
            samples = SampleSet.uniform(rng.uniform(0, 1, size=(3, 3)))
            g = rng.uniform(-0.2, 0.2, size=3)
            box = Hyperrectangle([0.0, 0.0, 0.0], [1.0, 1.0, 1.0])
            vols, _, _ = cell_box_moments_exact(samples, g, box)
            assert abs(vols.sum() - 1.0) <= 1e-9
            mc = cell_box_volumes_mc(samples, g, box, 0.02, 0.01, seed=6)
            assert np.abs(mc - vols).max() <= 0.02

    def test_dimension_guard(self):
        samples = SampleSet.uniform(np.array([[0.0] * 4, [1.0] * 4]))
        box = Hyperrectangle([0.0] * 4, [1.0] * 4)
        with pytest.raises(ValueError):
            cell_box_moments_exact(samples, np.zeros(2), box)


def _midpoint_moments(density, cells_per_box=10_000):
    """Midpoint-rule reference for box_moments."""
    n_mass = 0.0
    first = np.zeros(density.dimension)
    second = 0.0
    per_axis = int(round(cells_per_box ** (1.0 / density.dimension)))
    for box, w in density.boxes:
        axes = [
            lo + (np.arange(per_axis) + 0.5) * (hi - lo) / per_axis
            for lo, hi in zip(box.lo, box.hi)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        cell = box.volume / per_axis**density.dimension
        n_mass += w * cell * len(pts)
        first += w * cell * pts.sum(axis=0)
        second += w * cell * (pts**2).sum()
    return n_mass, first, second


class TestBoxMoments:
    def test_named_instance_values(
        self, symmetric_interval, single_sink, symmetric_square
    ):
        n, first, second = box_moments(symmetric_interval.density)
        assert_allclose([n, first[0], second], [1.0, 0.0, 1 / 3], atol=1e-12)
        n, first, second = box_moments(single_sink.density)
        assert_allclose([n, first[0], second], [1.0, 0.5, 1 / 3])
        n, first, second = box_moments(symmetric_square.density)
        assert_allclose(n, 1.0)
        assert_allclose(first, [0.0, 0.0], atol=1e-12)
        assert_allclose(second, 2 / 3)

    def test_matches_midpoint_rule_1d(self):
        density = BoxDensity(
            dimension=1,
            boxes=(
                (Hyperrectangle([-1.0], [0.5]), 0.4),
                (Hyperrectangle([1.0], [3.0]), 0.2),
            ),
        )
        exact = box_moments(density)
        ref = _midpoint_moments(density)
        assert abs(exact[0] - ref[0]) / abs(ref[0]) <= 1e-6
        assert np.abs(exact[1] - ref[1]).max() <= 1e-6 * max(1.0, np.abs(ref[1]).max())
        assert abs(exact[2] - ref[2]) / abs(ref[2]) <= 1e-6

    def test_matches_midpoint_rule_2d(self):
        # midpoint error is Theta(cell width^2): with 10^4 cells per box the
        # per-axis width is ~1e-2, so the honest 2D tolerance is 1e-4
        density = BoxDensity(
            dimension=2,
            boxes=(
                (Hyperrectangle([-1.0, 0.0], [0.0, 2.0]), 0.3),
                (Hyperrectangle([0.5, -1.0], [1.5, 1.0]), 0.2),
            ),
        )
        exact = box_moments(density)
        ref = _midpoint_moments(density)
        assert abs(exact[0] - ref[0]) / abs(ref[0]) <= 1e-6
        assert np.abs(exact[1] - ref[1]).max() <= 1e-6 * max(1.0, np.abs(ref[1]).max())
        assert abs(exact[2] - ref[2]) / abs(ref[2]) <= 1e-4


class TestApproximateDensity:
    def test_constant_density(self):
        density = approximate_density(np.ones(4), 0.25)
        assert density.k == 4
        assert_allclose(density.total_mass, 1.0)
        assert_allclose([w for _, w in density.boxes], [1.0] * 4)

    def test_step_function(self):
        density = approximate_density(np.array([1.0, 3.0]), 0.5)
        assert_allclose([w for _, w in density.boxes], [0.5, 1.5])

    def test_single_positive_cell(self):
        density = approximate_density(np.array([0.0, 2.0, 0.0]), 0.5)
        assert density.k == 1
        box, w = density.boxes[0]
        assert_allclose(w, 1.0 / box.volume)

    def test_compact_merges_runs(self):
        density = approximate_density(np.array([1.0, 1.0, 2.0, 2.0]), 0.25, compact=True)
        assert density.k == 2
        assert_allclose(density.total_mass, 1.0)

    def test_2d_grid(self):
        values = np.array([[1.0, 0.0], [2.0, 1.0]])
        density = approximate_density(values, (0.5, 0.5))
        assert density.k == 3
        assert_allclose(density.total_mass, 1.0)


class TestShadowBound:
    def test_projection_bound(self):
        rng = np.random.default_rng(17)
        for l in (1, 2, 3):
            for _ in range(50):
                lo = rng.uniform(-2, 0, size=l)
                hi = lo + rng.uniform(0.1, 2.0, size=l)
                box = Hyperrectangle(lo, hi)
                u = rng.normal(size=l)
                shadow = box_shadow_volume(box, u)
                xi = box.widths.min()
                assert shadow <= (2 * l / xi) * box.volume + 1e-12
