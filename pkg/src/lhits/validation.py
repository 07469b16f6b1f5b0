"""Input validation helpers shared by the estimators and numerical routines."""

from __future__ import annotations

import numpy as np

from .errors import ShapeError


def check_matrix(X, name: str = "X", n_cols: int | None = None,
                 require_finite: bool = True) -> np.ndarray:
    """Coerce to a 2-d float64 array and validate its column count."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeError(f"{name} must be 2-d, got shape {X.shape}")
    if n_cols is not None and X.shape[1] != n_cols:
        raise ShapeError(f"{name} must have {n_cols} columns, got {X.shape[1]}")
    if require_finite and X.size and not np.all(np.isfinite(X)):
        raise ShapeError(f"{name} contains non-finite entries")
    return X


def check_vector(x, name: str = "x", size: int | None = None,
                 require_finite: bool = True) -> np.ndarray:
    """Coerce to a 1-d float64 array and validate its length."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeError(f"{name} must be 1-d, got shape {x.shape}")
    if size is not None and x.shape[0] != size:
        raise ShapeError(f"{name} must have length {size}, got {x.shape[0]}")
    if require_finite and x.size and not np.all(np.isfinite(x)):
        raise ShapeError(f"{name} contains non-finite entries")
    return x


def as_trajectory_list(trajectories, name: str = "trajectories") -> list[np.ndarray]:
    """Normalize trajectory input to a list of (T_i, dim) float64 arrays.

    Accepts a single (p, T, dim) array, a single (T, dim) array, or a
    sequence of (T_i, dim) arrays with a common state dimension.
    """
    if isinstance(trajectories, np.ndarray):
        arr = np.asarray(trajectories, dtype=np.float64)
        if arr.ndim == 2:
            return [arr]
        if arr.ndim == 3:
            return [arr[i] for i in range(arr.shape[0])]
        raise ShapeError(f"{name} must be 2-d or 3-d, got shape {arr.shape}")
    out = [check_matrix(t, name=f"{name}[{i}]") for i, t in enumerate(trajectories)]
    if not out:
        raise ShapeError(f"{name} is empty")
    dims = {t.shape[1] for t in out}
    if len(dims) > 1:
        raise ShapeError(f"{name} mix state dimensions {sorted(dims)}")
    return out
