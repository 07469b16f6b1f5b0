"""Trajectory container, pair construction, and normalization contracts."""

import numpy as np
import pytest

from lhits.data import Normalizer, PairSet, TrajectorySet, build_pairs
from lhits.errors import EmptyPairsError, ShapeError


class TestTrajectorySet:
    def test_validates_shape_and_finiteness(self):
        with pytest.raises(ShapeError):
            TrajectorySet(np.zeros((3, 4)), 0.1)
        bad = np.zeros((1, 4, 2))
        bad[0, 2, 1] = np.inf
        with pytest.raises(ShapeError):
            TrajectorySet(bad, 0.1)
        with pytest.raises(ShapeError):
            TrajectorySet(np.zeros((1, 4, 2)), -1.0)

    def test_split_partitions_in_order(self, rng):
        ts = TrajectorySet(rng.normal(size=(6, 5, 3)), 0.5, "synthetic")
        train, val, test = ts.split(3, 2, 1)
        assert train.n_trajectories == 3 and val.n_trajectories == 2
        assert np.array_equal(test.data[0], ts.data[5])


class TestBuildPairs:
    def test_counting_oracle(self):
        traj = np.arange(10.0).reshape(5, 2)
        pairs = build_pairs(traj[None], 2)
        assert pairs.n_pairs == 3
        assert np.array_equal(pairs.inputs, traj[:3])
        assert np.array_equal(pairs.targets, traj[2:])

    def test_boundary_single_pair(self):
        traj = np.arange(8.0).reshape(4, 2)
        pairs = build_pairs(traj[None], 3)
        assert pairs.n_pairs == 1
        assert np.array_equal(pairs.inputs[0], traj[0])
        assert np.array_equal(pairs.targets[0], traj[3])

    def test_too_short_trajectory_raises(self):
        with pytest.raises(EmptyPairsError):
            build_pairs(np.zeros((1, 4, 2)), 4)

    def test_pairs_never_span_trajectories(self):
        # poison the trajectory boundaries with sentinels: if any pair
        # crossed a boundary, a sentinel would appear as input with the next
        # trajectory's value as target
        t0 = np.full((4, 1), 1.0)
        t0[-1] = 111.0  # sentinel end of trajectory 0
        t1 = np.full((4, 1), 2.0)
        t1[0] = 222.0  # sentinel start of trajectory 1
        pairs = build_pairs(np.stack([t0, t1]), 1)
        assert pairs.n_pairs == 6
        for x, y in zip(pairs.inputs[:, 0], pairs.targets[:, 0]):
            # a cross-boundary pair would be (111, 222)
            assert not (x == 111.0 and y == 222.0)

    def test_paper_dyadic_ladder_is_eleven_models(self):
        from lhits.config import parse_config
        cfg = parse_config({"system": "ks"})
        assert cfg.step_multiples == [2 ** k for k in range(11)]
        assert len(cfg.step_multiples) == 11


class TestNormalizer:
    def test_constant_feature_passes_through(self, rng):
        X = rng.normal(size=(20, 3))
        X[:, 1] = 4.2
        norm = Normalizer().fit(X)
        out = norm.transform(X)
        assert np.array_equal(out[:, 1], X[:, 1])

    def test_round_trip_identity(self, rng):
        X = rng.normal(size=(50, 4)) * 10 + 3
        norm = Normalizer().fit(X)
        back = norm.inverse_transform(norm.transform(X))
        assert np.max(np.abs(back - X)) < 1e-12

    def test_means_match_naive_two_pass_loop(self, rng):
        X = rng.normal(size=(13, 3))
        norm = Normalizer().fit(X)
        for j in range(3):
            total = 0.0
            for i in range(13):
                total += X[i, j]
            assert norm.means_[j] == pytest.approx(total / 13, rel=1e-12)

    def test_none_mode_is_identity(self, rng):
        X = rng.normal(size=(10, 3))
        norm = Normalizer(mode="none").fit(X)
        assert np.array_equal(norm.transform(X), X)

    def test_three_dimensional_shape_preserved(self, rng):
        X = rng.normal(size=(2, 5, 3))
        norm = Normalizer().fit(X)
        assert norm.transform(X).shape == (2, 5, 3)
        back = norm.inverse_transform(norm.transform(X))
        assert np.max(np.abs(back - X)) < 1e-12


class TestPairSet:
    def test_row_count_mismatch_rejected(self):
        with pytest.raises(ShapeError):
            PairSet(np.zeros((3, 2)), np.zeros((4, 2)))
