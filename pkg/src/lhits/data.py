"""Trajectory containers, dyadic training pairs, and per-feature normalization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import EmptyPairsError, ShapeError
from .validation import as_trajectory_list, check_matrix

SYSTEM_TAGS = ("fhn", "ks", "synthetic")


@dataclass
class TrajectorySet:
    """p trajectories of T states of dimension n, sampled every `dt` time units."""

    data: np.ndarray
    dt: float
    system: str = "synthetic"

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.data.ndim != 3:
            raise ShapeError(f"trajectory data must be (p, T, n), got shape {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise ShapeError("trajectory data contains non-finite entries")
        if not self.dt > 0:
            raise ShapeError(f"dt must be positive, got {self.dt}")
        if self.system not in SYSTEM_TAGS:
            raise ShapeError(f"unknown system tag {self.system!r}")

    @property
    def n_trajectories(self) -> int:
        return self.data.shape[0]

    @property
    def n_steps(self) -> int:
        return self.data.shape[1]

    @property
    def state_dim(self) -> int:
        return self.data.shape[2]

    def split(self, n_train: int, n_val: int, n_test: int):
        """Partition trajectories in stored order into train/val/test sets."""
        total = n_train + n_val + n_test
        if min(n_train, n_val, n_test) < 1:
            raise ShapeError("each split needs at least one trajectory")
        if total > self.n_trajectories:
            raise ShapeError(
                f"split sizes {n_train}/{n_val}/{n_test} exceed {self.n_trajectories} trajectories")
        parts = []
        start = 0
        for count in (n_train, n_val, n_test):
            parts.append(TrajectorySet(self.data[start:start + count], self.dt, self.system))
            start += count
        return tuple(parts)


@dataclass
class PairSet:
    """Input/target state pairs separated by `step_multiple` grid steps."""

    inputs: np.ndarray
    targets: np.ndarray
    step_multiple: int = 1

    def __post_init__(self):
        self.inputs = check_matrix(self.inputs, "inputs")
        self.targets = check_matrix(self.targets, "targets", n_cols=self.inputs.shape[1])
        if self.inputs.shape[0] != self.targets.shape[0]:
            raise ShapeError("inputs and targets must have equal row counts")

    @property
    def n_pairs(self) -> int:
        return self.inputs.shape[0]


def build_pairs(trajectories, step_multiple: int) -> PairSet:
    """Pool (state_t, state_{t+s}) pairs from every trajectory.

    Pairs never span trajectory boundaries: each trajectory of length T
    contributes exactly T - s pairs for t = 0 .. T-1-s.
    """
    s = int(step_multiple)
    if s < 1:
        raise ShapeError(f"step_multiple must be >= 1, got {step_multiple}")
    trajs = as_trajectory_list(trajectories)
    inputs, targets = [], []
    for i, traj in enumerate(trajs):
        if traj.shape[0] <= s:
            raise EmptyPairsError(
                f"trajectory {i} has length {traj.shape[0]} <= step multiple {s}: no pairs")
        inputs.append(traj[:-s])
        targets.append(traj[s:])
    return PairSet(np.concatenate(inputs), np.concatenate(targets), step_multiple=s)


class Normalizer(BaseEstimator, TransformerMixin):
    """Per-feature standardizer with a zero-variance guard.

    mode "standardize" removes the per-feature mean and scale fitted on the
    training data; mode "none" is the identity. Features that are exactly
    constant pass through unchanged in either mode. Accepts 2-d state
    matrices or 3-d trajectory stacks (shape is preserved).
    """

    def __init__(self, mode: str = "standardize"):
        self.mode = mode

    @staticmethod
    def _as2d(X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 2:
            return X
        if X.ndim == 3:
            return X.reshape(-1, X.shape[-1])
        raise ShapeError(f"expected 2-d or 3-d input, got shape {X.shape}")

    def fit(self, X, y=None):
        if self.mode not in ("standardize", "none"):
            raise ShapeError(f"unknown normalizer mode {self.mode!r}")
        flat = self._as2d(X)
        n = flat.shape[1]
        if self.mode == "none":
            self.means_ = np.zeros(n)
            self.stds_ = np.ones(n)
        else:
            means = flat.mean(axis=0)
            stds = flat.std(axis=0)
            # ptp == 0 detects exactly-constant features, immune to the
            # rounding noise a tiny nonzero std would introduce
            constant = np.ptp(flat, axis=0) == 0.0
            means[constant] = 0.0
            stds[constant] = 1.0
            stds[stds == 0.0] = 1.0
            self.means_ = means
            self.stds_ = stds
        self.n_features_in_ = n
        return self

    def transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        flat = self._as2d(X)
        if flat.shape[1] != self.n_features_in_:
            raise ShapeError(
                f"expected {self.n_features_in_} features, got {flat.shape[1]}")
        return ((flat - self.means_) / self.stds_).reshape(X.shape)

    def inverse_transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        flat = self._as2d(X)
        if flat.shape[1] != self.n_features_in_:
            raise ShapeError(
                f"expected {self.n_features_in_} features, got {flat.shape[1]}")
        return (flat * self.stds_ + self.means_).reshape(X.shape)
