"""Hierarchical coupling of the stepper bank on the unit time grid.

The schedule: the coarsest active model rolls out from z0 and lays
checkpoints on its own grid; each finer model then advances *all* states
produced so far, as one stacked batch, just far enough to reach the next
coarser checkpoint; the accumulated states are rearranged chronologically
and any grid times below the finest active step are filled by
interpolation. Checkpoints are therefore produced only by the coarsest
model, so errors of the finer maps never accumulate across checkpoints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (DivergenceError, ExtrapolationError, SelectionError,
                     ShapeError)
from .steppers import StepperBank
from .validation import as_trajectory_list, check_vector

INTERPOLANTS = ("cubic", "linear")


@dataclass(frozen=True)
class CouplingPlan:
    """Which contiguous run of the (descending-sorted) bank to couple.

    `horizon` records the validation horizon the plan was selected on; the
    coupling itself accepts any horizon.
    """

    active_indices: tuple[int, ...]
    interpolant: str = "cubic"
    horizon: int = 0

    def __post_init__(self):
        idx = tuple(int(i) for i in self.active_indices)
        if not idx:
            raise ShapeError("a coupling plan needs at least one active stepper")
        if any(b - a != 1 for a, b in zip(idx[:-1], idx[1:])):
            raise ShapeError(f"active indices must be contiguous and increasing, got {idx}")
        if self.interpolant not in INTERPOLANTS:
            raise ShapeError(f"interpolant must be one of {INTERPOLANTS}, got {self.interpolant!r}")
        object.__setattr__(self, "active_indices", idx)


def interpolate_fill(node_times, node_values, query_times, kind: str = "cubic") -> np.ndarray:
    """Per-dimension interpolation through (time, value) nodes, exact at nodes.

    "cubic" uses a not-a-knot cubic spline and needs at least 4 nodes;
    below that (or with kind="linear") it falls back to piecewise-linear.
    Queries must lie inside [node_times[0], node_times[-1]].
    """
    t = np.asarray(node_times, dtype=np.float64)
    values = np.asarray(node_values, dtype=np.float64)
    queries = np.asarray(query_times, dtype=np.float64)
    if t.ndim != 1 or t.size < 2:
        raise ShapeError(f"need at least 2 nodes, got {t.size}")
    if np.any(np.diff(t) <= 0):
        raise ShapeError("node times must be strictly increasing")
    if values.ndim != 2 or values.shape[0] != t.size:
        raise ShapeError(
            f"node values must be (n_nodes, dim) with n_nodes={t.size}, got {values.shape}")
    if queries.size and (queries.min() < t[0] or queries.max() > t[-1]):
        raise ExtrapolationError(
            f"queries must lie within [{t[0]}, {t[-1]}], got "
            f"[{queries.min()}, {queries.max()}]")
    if kind not in INTERPOLANTS:
        raise ShapeError(f"interpolant must be one of {INTERPOLANTS}, got {kind!r}")
    if kind == "linear" or t.size < 4:
        out = np.empty((queries.size, values.shape[1]))
        for j in range(values.shape[1]):
            out[:, j] = np.interp(queries, t, values[:, j])
        return out
    return CubicSpline(t, values, axis=0, bc_type="not-a-knot")(queries)


def couple(bank: StepperBank, plan: CouplingPlan, z0, horizon: int) -> np.ndarray:
    """Dense latent trajectory of horizon+1 states at unit grid spacing.

    Runs the hierarchical schedule over the plan's active steppers. Node
    states are copied into the output verbatim (the interpolant only fills
    the gaps), so the coarse checkpoints are bit-identical to the coarsest
    model's pure rollout and output[0] == z0 exactly.
    """
    if horizon < 1:
        raise ShapeError(f"horizon must be >= 1, got {horizon}")
    if max(plan.active_indices) >= len(bank):
        raise ShapeError(
            f"plan indices {plan.active_indices} out of range for a bank of {len(bank)}")
    active = [bank.steppers[i] for i in plan.active_indices]
    z0 = check_vector(z0, "z0", size=bank.latent_dim)

    s_max = int(active[0].step_multiple)
    s_min = int(active[-1].step_multiple)
    buf = np.zeros((horizon + s_max + 1, bank.latent_dim))
    buf[0] = z0
    times = [0]

    budget = horizon
    for model in active:
        s = int(model.step_multiple)
        n_forward = budget // s
        if n_forward > 0:
            states = buf[times]
            time_lists = [times]
            for t in range(1, n_forward + 1):
                states = model.step(states)
                bad = ~np.isfinite(states).all(axis=1)
                if bad.any():
                    when = times[int(np.argmax(bad))] + t * s
                    raise DivergenceError(
                        f"stepper with step multiple {s} diverged at latent "
                        f"time index {when}")
                shifted = [x + t * s for x in times]
                buf[shifted] = states
                time_lists.append(shifted)
            # chronological rearrangement: each original node followed by its
            # forward extensions, which all precede the next original node
            times = [v for group in zip(*time_lists) for v in group]
        budget = s - 1

    # the last covered time can fall short of the horizon when the coarsest
    # step does not divide it; extend with the finest active model
    fine = active[-1]
    last = times[-1]
    state = buf[last][None, :]
    while last < horizon:
        state = fine.step(state)
        last += s_min
        if not np.all(np.isfinite(state)):
            raise DivergenceError(
                f"stepper with step multiple {s_min} diverged at latent "
                f"time index {last}")
        buf[last] = state[0]
        times.append(last)

    node_times = np.asarray(times)
    node_values = buf[node_times]
    out = np.empty((horizon + 1, bank.latent_dim))
    covered = np.zeros(horizon + 1, dtype=bool)
    in_range = node_times <= horizon
    out[node_times[in_range]] = node_values[in_range]
    covered[node_times[in_range]] = True
    missing = np.flatnonzero(~covered)
    if missing.size:
        out[missing] = interpolate_fill(node_times, node_values, missing,
                                        kind=plan.interpolant)
    return out


def enumerate_plans(n_models: int, interpolant: str = "cubic",
                    horizon: int = 0) -> list[CouplingPlan]:
    """All n(n+1)/2 contiguous ranges of a bank of n models."""
    return [CouplingPlan(tuple(range(i, j + 1)), interpolant=interpolant, horizon=horizon)
            for i in range(n_models) for j in range(i, n_models)]


def score_plan(bank: StepperBank, plan: CouplingPlan, latent_trajectories,
               horizon: int) -> float:
    """Mean dense-trajectory MSE of the coupled prediction; inf on divergence."""
    trajs = as_trajectory_list(latent_trajectories, "latent_trajectories")
    total = 0.0
    for traj in trajs:
        if traj.shape[0] <= horizon:
            raise ShapeError(
                f"validation trajectory of length {traj.shape[0]} cannot score "
                f"horizon {horizon}")
        try:
            pred = couple(bank, plan, traj[0], horizon)
        except DivergenceError:
            return float("inf")
        diff = pred - traj[:horizon + 1]
        total += float(np.mean(diff * diff))
    return total / len(trajs)


def cross_validate(bank: StepperBank, latent_trajectories, horizon: int,
                   interpolant: str = "cubic") -> CouplingPlan:
    """Pick the contiguous bank range whose coupled prediction best fits the
    validation latents.

    Ties break toward fewer models, then toward the larger smallest step
    (cheaper prediction). Raises SelectionError if every candidate diverges.
    """
    candidates = enumerate_plans(len(bank), interpolant=interpolant, horizon=horizon)
    best_plan = None
    best_key = None
    for plan in candidates:
        mse = score_plan(bank, plan, latent_trajectories, horizon)
        if not np.isfinite(mse):
            continue
        smallest_step = bank.steppers[plan.active_indices[-1]].step_multiple
        key = (mse, len(plan.active_indices), -int(smallest_step))
        if best_key is None or key < best_key:
            best_key = key
            best_plan = plan
    if best_plan is None:
        raise SelectionError("every candidate coupling plan diverged on validation data")
    return best_plan
