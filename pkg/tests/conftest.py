"""Shared fixtures and independent reference implementations used as oracles."""

import numpy as np
import pytest
from scipy.interpolate import CubicSpline

from lhits.nets import Mlp
from lhits.steppers import ResNetStepper, StepperBank


def make_affine_stepper(A, b, step_multiple):
    """Stepper whose body is a single linear layer: exactly N(z) = z A + b."""
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    stepper = ResNetStepper(step_multiple=step_multiple)
    stepper.set_body(Mlp([A.shape[0], A.shape[1]], [A], [b], activation="identity"))
    return stepper


def make_affine_bank(bodies, steps, dt=0.1):
    """Bank of exact affine steppers; bodies is a list of (A, b) pairs
    aligned with `steps` (descending powers of two)."""
    steppers = [make_affine_stepper(A, b, s) for (A, b), s in zip(bodies, steps)]
    return StepperBank(steppers, dt)


def reference_couple(bodies, steps, z0, horizon, kind="cubic"):
    """Scalar-by-scalar reference of the hierarchical coupling schedule.

    Applies exact affine maps entry by entry with plain Python loops:
    coarsest model first from time 0, then each finer model extending every
    known state across the previous model's gap, then a finest-model tail up
    to the horizon, then per-dimension interpolation of the leftover times.
    Entirely independent of the vectorized implementation.
    """

    def apply(A, b, z):
        d = len(z)
        out = [0.0] * d
        for i in range(d):
            acc = z[i] + b[i]
            for j in range(d):
                acc += z[j] * A[j][i]
            out[i] = acc
        return out

    known = {0: [float(v) for v in z0]}
    times = [0]
    budget = horizon
    for (A, b), s in zip(bodies, steps):
        n_forward = budget // s
        if n_forward > 0:
            for t0 in list(times):
                state = known[t0]
                for t in range(1, n_forward + 1):
                    state = apply(A, b, state)
                    known[t0 + t * s] = state
            lists = [times] + [[t0 + t * s for t0 in times]
                               for t in range(1, n_forward + 1)]
            times = [v for grp in zip(*lists) for v in grp]
        budget = s - 1
    A, b = bodies[-1]
    s = steps[-1]
    last = times[-1]
    while last < horizon:
        known[last + s] = apply(A, b, known[last])
        last += s
        times.append(last)

    t_nodes = sorted(times)
    vals = np.array([known[t] for t in t_nodes])
    d = len(z0)
    out = np.empty((horizon + 1, d))
    node_set = {t for t in t_nodes if t <= horizon}
    for t in node_set:
        out[t] = known[t]
    missing = [t for t in range(horizon + 1) if t not in node_set]
    if missing:
        if kind == "linear" or len(t_nodes) < 4:
            for j in range(d):
                out[missing, j] = np.interp(missing, t_nodes, vals[:, j])
        else:
            for j in range(d):
                spline = CubicSpline(t_nodes, vals[:, j], bc_type="not-a-knot")
                out[missing, j] = spline(missing)
    return out


def linear_latent_trajectories(A, b, z0_list, n_steps):
    """Exact trajectories of the affine map z <- z + (z A + b)."""
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    trajs = []
    for z0 in z0_list:
        z = np.asarray(z0, dtype=np.float64)
        rows = [z]
        for _ in range(n_steps):
            z = z + (z @ A + b)
            rows.append(z)
        trajs.append(np.stack(rows))
    return np.stack(trajs)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
