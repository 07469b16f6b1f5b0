"""Residual-network flow maps and the dyadic bank that holds one per step size."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .data import build_pairs
from .errors import ConfigError, DivergenceError, ShapeError
from .nets import Mlp, fit_mlp
from .utils import rng_for, thread_map
from .validation import as_trajectory_list, check_matrix, check_vector


def _is_power_of_two(s: int) -> bool:
    return s >= 1 and (s & (s - 1)) == 0


class ResNetStepper(BaseEstimator, RegressorMixin):
    """One learned flow map: z(t + s*dt) = z(t) + N(z(t)).

    The MLP body N is trained on the residual between pair targets and
    inputs, which is the same objective as regressing the skip-connected
    output onto the targets. `step_multiple` is the number s of unit grid
    steps one application advances; it must be a power of two so the bank
    forms a dyadic ladder.

    Attributes
    ----------
    body_ : trained Mlp realizing N
    latent_dim_ : state dimension the map operates on
    loss_history_ : per-epoch training MSE
    n_evals_ : running count of states pushed through the body (diagnostics)
    """

    def __init__(self, step_multiple: int = 1, hidden=(128, 128, 128),
                 activation: str = "relu", epochs: int = 20000, batch_size: int = 32,
                 learning_rate: float = 1e-3, seed: int = 0):
        self.step_multiple = step_multiple
        self.hidden = hidden
        self.activation = activation
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.seed = seed

    def _validate_step(self) -> int:
        s = int(self.step_multiple)
        if not _is_power_of_two(s):
            raise ConfigError(f"step_multiple must be a power of two >= 1, got {s}")
        return s

    def fit(self, X, y):
        """Train the body on input/target state pairs (rows of X map to rows of y)."""
        s = self._validate_step()
        X = check_matrix(X, "X")
        y = check_matrix(y, "y", n_cols=X.shape[1])
        if X.shape[0] != y.shape[0] or X.shape[0] == 0:
            raise ShapeError("X and y must be non-empty with equal row counts")
        d = X.shape[1]
        hidden = [int(h) for h in self.hidden]
        self.body_ = Mlp.initialize([d, *hidden, d],
                                    rng_for(self.seed, "stepper", s, "init"),
                                    activation=self.activation)
        self.loss_history_ = fit_mlp(
            self.body_, X, y - X, epochs=self.epochs, batch_size=self.batch_size,
            learning_rate=self.learning_rate, seed=self.seed,
            stream_tags=("stepper", s))
        self.latent_dim_ = d
        self.n_evals_ = 0
        return self

    def set_body(self, body: Mlp):
        """Install an externally built body (deserialization, exact oracles)."""
        if body.input_dim != body.output_dim:
            raise ShapeError("stepper body must map a space to itself")
        self._validate_step()
        self.body_ = body
        self.latent_dim_ = body.input_dim
        self.loss_history_ = []
        self.n_evals_ = 0
        return self

    def step(self, Z):
        """Advance a batch of states by one application of the flow map."""
        Z = check_matrix(Z, "Z", n_cols=self.latent_dim_, require_finite=False)
        self.n_evals_ += Z.shape[0]
        # blow-up is detected downstream; silence the overflow chatter here
        with np.errstate(over="ignore", invalid="ignore"):
            return Z + self.body_.forward(Z)

    # sklearn-facing alias: predicting one flow-map application ahead
    predict = step

    def rollout(self, z0, num_steps: int) -> np.ndarray:
        """Autoregressive trajectory [z0, step(z0), step^2(z0), ...].

        Output has num_steps+1 rows spaced step_multiple grid steps apart.
        Raises DivergenceError naming the failing step on blow-up.
        """
        if num_steps < 0:
            raise ShapeError(f"num_steps must be >= 0, got {num_steps}")
        z0 = check_vector(z0, "z0", size=self.latent_dim_)
        out = np.empty((num_steps + 1, self.latent_dim_))
        out[0] = z0
        state = z0[None, :]
        for k in range(1, num_steps + 1):
            state = self.step(state)
            if not np.all(np.isfinite(state)):
                raise DivergenceError(
                    f"stepper with step multiple {self.step_multiple} diverged "
                    f"at rollout step {k}")
            out[k] = state[0]
        return out


class StepperBank:
    """Trained steppers at distinct dyadic step sizes, sorted descending.

    The descending order is what the coupling schedule walks: coarsest model
    first to lay checkpoints, finer models afterwards to refine between them.
    """

    def __init__(self, steppers, dt: float):
        steppers = list(steppers)
        if not steppers:
            raise ShapeError("a bank needs at least one stepper")
        multiples = [int(s.step_multiple) for s in steppers]
        if len(set(multiples)) != len(multiples):
            raise ConfigError(f"step multiples must be distinct, got {sorted(multiples)}")
        for m in multiples:
            if not _is_power_of_two(m):
                raise ConfigError(f"step multiple {m} is not a power of two")
        dims = {s.latent_dim_ for s in steppers}
        if len(dims) != 1:
            raise ShapeError(f"steppers operate on mixed dimensions {sorted(dims)}")
        if not dt > 0:
            raise ShapeError(f"dt must be positive, got {dt}")
        self.steppers = sorted(steppers, key=lambda s: -int(s.step_multiple))
        self.latent_dim = dims.pop()
        self.dt = float(dt)

    def __len__(self) -> int:
        return len(self.steppers)

    @property
    def step_multiples(self) -> tuple[int, ...]:
        return tuple(int(s.step_multiple) for s in self.steppers)

    def reset_eval_counts(self) -> None:
        for s in self.steppers:
            s.n_evals_ = 0


def train_stepper_bank(latent_trajectories, step_multiples, dt: float, *,
                       hidden=(128, 128, 128), activation: str = "relu",
                       epochs: int = 20000, batch_size: int = 32,
                       learning_rate: float = 1e-3, seed: int = 0,
                       n_threads: int = 1) -> StepperBank:
    """Train one flow map per step size on pairs subsampled from trajectories.

    Models are independent (one writer each), so they may train in parallel;
    results are deterministic regardless of thread count. Training failures
    propagate annotated with the owning step multiple.
    """
    trajs = as_trajectory_list(latent_trajectories, "latent_trajectories")
    multiples = sorted({int(m) for m in step_multiples}, reverse=True)
    if not multiples:
        raise ConfigError("step_multiples is empty")
    max_s = max(multiples)
    if min(t.shape[0] for t in trajs) <= max_s:
        raise ShapeError(
            f"trajectory length must exceed the largest step multiple {max_s}")

    def _train(s: int) -> ResNetStepper:
        pairs = build_pairs(trajs, s)
        stepper = ResNetStepper(
            step_multiple=s, hidden=hidden, activation=activation, epochs=epochs,
            batch_size=batch_size, learning_rate=learning_rate, seed=seed)
        try:
            return stepper.fit(pairs.inputs, pairs.targets)
        except Exception as exc:
            raise type(exc)(f"stepper with step multiple {s}: {exc}") from exc

    steppers = thread_map(_train, multiples, n_threads)
    return StepperBank(steppers, dt)
