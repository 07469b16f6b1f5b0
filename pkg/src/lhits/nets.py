"""Dense feedforward networks with hand-rolled backpropagation and Adam.

Everything is float64 numpy. Networks are plain parameter containers; the
training loops mutate them in place under a single-writer contract, while
`forward` is pure and safe to call concurrently on a frozen network.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError, TrainingError
from .utils import rng_for


def mse_loss(pred: np.ndarray, target: np.ndarray):
    """Mean squared error over all entries and its gradient w.r.t. pred."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ShapeError(f"pred shape {pred.shape} != target shape {target.shape}")
    diff = pred - target
    loss = float(np.mean(diff * diff)) if diff.size else 0.0
    grad = (2.0 / diff.size) * diff if diff.size else np.zeros_like(diff)
    return loss, grad


class Mlp:
    """Fully connected network: affine layers, ReLU on hidden, linear output.

    weights[k] has shape (dims[k], dims[k+1]) and biases[k] has shape
    (dims[k+1],). `activation` selects the hidden nonlinearity: "relu" or
    "identity" (the latter makes the whole network affine, used for exact
    oracles and linear coders). The final layer never has an activation.
    """

    def __init__(self, layer_dims, weights, biases, activation: str = "relu"):
        if activation not in ("relu", "identity"):
            raise ShapeError(f"unknown activation {activation!r}")
        dims = [int(d) for d in layer_dims]
        if len(dims) < 2 or any(d < 1 for d in dims):
            raise ShapeError(f"layer_dims must list at least 2 positive sizes, got {dims}")
        if len(weights) != len(dims) - 1 or len(biases) != len(dims) - 1:
            raise ShapeError("one weight matrix and bias vector required per layer")
        self.layer_dims = dims
        self.weights = []
        self.biases = []
        for k, (w, b) in enumerate(zip(weights, biases)):
            w = np.array(w, dtype=np.float64)
            b = np.array(b, dtype=np.float64)
            if w.shape != (dims[k], dims[k + 1]):
                raise ShapeError(
                    f"weights[{k}] must have shape {(dims[k], dims[k + 1])}, got {w.shape}")
            if b.shape != (dims[k + 1],):
                raise ShapeError(f"biases[{k}] must have shape {(dims[k + 1],)}, got {b.shape}")
            self.weights.append(w)
            self.biases.append(b)
        self.activation = activation

    @classmethod
    def initialize(cls, layer_dims, rng: np.random.Generator, activation: str = "relu"):
        """He-uniform weights scaled by fan-in, zero biases."""
        dims = [int(d) for d in layer_dims]
        weights, biases = [], []
        for din, dout in zip(dims[:-1], dims[1:]):
            limit = np.sqrt(6.0 / din)
            weights.append(rng.uniform(-limit, limit, size=(din, dout)))
            biases.append(np.zeros(dout))
        return cls(dims, weights, biases, activation=activation)

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def output_dim(self) -> int:
        return self.layer_dims[-1]

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def parameters(self) -> list[np.ndarray]:
        """All parameter arrays in declaration order: W0, b0, W1, b1, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def copy(self) -> "Mlp":
        return Mlp(self.layer_dims, [w.copy() for w in self.weights],
                   [b.copy() for b in self.biases], activation=self.activation)

    def forward(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.input_dim:
            raise ShapeError(
                f"input must have shape (batch, {self.input_dim}), got {X.shape}")
        H = X
        last = self.n_layers - 1
        for k in range(self.n_layers):
            H = H @ self.weights[k] + self.biases[k]
            if k < last and self.activation == "relu":
                H = np.maximum(H, 0.0)
        return H

    def forward_cached(self, X: np.ndarray):
        """Forward pass returning the output and the caches backprop needs."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.input_dim:
            raise ShapeError(
                f"input must have shape (batch, {self.input_dim}), got {X.shape}")
        inputs = [X]          # layer inputs H_0 .. H_{L-1}
        preacts = []          # affine outputs A_1 .. A_L
        H = X
        last = self.n_layers - 1
        for k in range(self.n_layers):
            A = H @ self.weights[k] + self.biases[k]
            preacts.append(A)
            H = np.maximum(A, 0.0) if (k < last and self.activation == "relu") else A
            if k < last:
                inputs.append(H)
        return H, (inputs, preacts)

    def backprop_cached(self, cache, d_out: np.ndarray):
        """Gradients of the cached forward pass.

        Returns (grads, d_input) where grads matches parameters() order.
        The ReLU subgradient at exactly 0 is 0.
        """
        inputs, preacts = cache
        G = np.asarray(d_out, dtype=np.float64)
        if G.shape != preacts[-1].shape:
            raise ShapeError(
                f"cotangent must have shape {preacts[-1].shape}, got {G.shape}")
        grads = [None] * (2 * self.n_layers)
        for k in range(self.n_layers - 1, -1, -1):
            grads[2 * k] = inputs[k].T @ G
            grads[2 * k + 1] = G.sum(axis=0)
            G = G @ self.weights[k].T
            if k > 0 and self.activation == "relu":
                G = G * (preacts[k - 1] > 0.0)
        return grads, G

    def backprop(self, X: np.ndarray, d_out: np.ndarray):
        """Exact gradients of forward(X) contracted with d_out; see backprop_cached."""
        _, cache = self.forward_cached(X)
        return self.backprop_cached(cache, d_out)


class Adam:
    """Bias-corrected Adam over a fixed list of parameter arrays."""

    def __init__(self, params, learning_rate: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, epsilon: float = 1e-8):
        if learning_rate <= 0:
            raise TrainingError(f"learning rate must be positive, got {learning_rate}")
        self.learning_rate = float(learning_rate)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.epsilon = float(epsilon)
        self.step_count = 0
        self.first_moment = [np.zeros_like(p) for p in params]
        self.second_moment = [np.zeros_like(p) for p in params]

    def step(self, params, grads) -> None:
        """One in-place update; raises on non-finite gradients."""
        if len(params) != len(self.first_moment) or len(grads) != len(self.first_moment):
            raise ShapeError("params/grads do not match the moment buffers")
        for i, g in enumerate(grads):
            if not np.all(np.isfinite(g)):
                raise TrainingError(f"non-finite gradient for parameter {i}")
        self.step_count += 1
        c1 = 1.0 - self.beta1 ** self.step_count
        c2 = 1.0 - self.beta2 ** self.step_count
        for p, g, m, v in zip(params, grads, self.first_moment, self.second_moment):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= self.learning_rate * (m / c1) / (np.sqrt(v / c2) + self.epsilon)


def _flatten_parameters(nets):
    """Repack the nets' parameters into one contiguous vector.

    The nets' weight/bias attributes are rebound to views of the flat
    buffer, so elementwise optimizer updates on the buffer update the nets
    in place. Returns (flat_params, flat_grad_buffer, grad_views) where
    grad_views mirror the concatenated parameters() layout. Elementwise
    updates on the flat vector are bit-identical to per-array updates, so
    this is purely a call-overhead optimization.
    """
    params = [p for net in nets for p in net.parameters()]
    total = sum(p.size for p in params)
    flat = np.empty(total)
    grad_flat = np.empty(total)
    grad_views = []
    offset = 0
    for p in params:
        view = flat[offset:offset + p.size].reshape(p.shape)
        view[...] = p
        grad_views.append(grad_flat[offset:offset + p.size].reshape(p.shape))
        offset += p.size
    offset = 0
    for net in nets:
        for k in range(net.n_layers):
            w, b = net.weights[k], net.biases[k]
            net.weights[k] = flat[offset:offset + w.size].reshape(w.shape)
            offset += w.size
            net.biases[k] = flat[offset:offset + b.size].reshape(b.shape)
            offset += b.size
    return flat, grad_flat, grad_views


def fit_mlp(net: Mlp, X: np.ndarray, Y: np.ndarray, *, epochs: int, batch_size: int,
            learning_rate: float, seed: int, stream_tags=()) -> list[float]:
    """Minibatch Adam regression of net(X) onto Y; mutates `net` in place.

    Minibatch order reshuffles once per epoch from a counter-based stream
    keyed by (seed, *stream_tags, "shuffle", epoch), so training is a
    deterministic function of (initial params, data, seed). Returns the
    per-epoch mean training loss (length == epochs).
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
        raise ShapeError(f"inconsistent training shapes {X.shape} vs {Y.shape}")
    if X.shape[0] == 0:
        raise ShapeError("training set is empty")
    n = X.shape[0]
    batch_size = min(int(batch_size), n)
    if batch_size < 1:
        raise ShapeError("batch_size must be >= 1")
    flat, grad_flat, grad_views = _flatten_parameters([net])
    adam = Adam([flat], learning_rate=learning_rate)
    history = []
    for epoch in range(int(epochs)):
        order = rng_for(seed, *stream_tags, "shuffle", epoch).permutation(n)
        total = 0.0
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            pred, cache = net.forward_cached(X[idx])
            loss, d_pred = mse_loss(pred, Y[idx])
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}")
            grads, _ = net.backprop_cached(cache, d_pred)
            for view, g in zip(grad_views, grads):
                view[...] = g
            adam.step([flat], [grad_flat])
            total += loss * len(idx)
        history.append(total / n)
    return history


def fit_autoencoder_nets(encoder: Mlp, decoder: Mlp, X: np.ndarray, *, epochs: int,
                         batch_size: int, learning_rate: float, seed: int,
                         stream_tags=()) -> list[float]:
    """Joint reconstruction training of an encoder/decoder pair on states X.

    Same determinism contract as fit_mlp; the decoder's input cotangent is
    chained into the encoder so both halves see exact gradients.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeError(f"X must be 2-d, got shape {X.shape}")
    n = X.shape[0]
    if n < batch_size:
        raise ShapeError(f"need at least batch_size={batch_size} rows, got {n}")
    flat, grad_flat, grad_views = _flatten_parameters([encoder, decoder])
    adam = Adam([flat], learning_rate=learning_rate)
    history = []
    for epoch in range(int(epochs)):
        order = rng_for(seed, *stream_tags, "shuffle", epoch).permutation(n)
        total = 0.0
        for start in range(0, n, int(batch_size)):
            idx = order[start:start + int(batch_size)]
            Xb = X[idx]
            Z, enc_cache = encoder.forward_cached(Xb)
            Xhat, dec_cache = decoder.forward_cached(Z)
            loss, d_pred = mse_loss(Xhat, Xb)
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}")
            dec_grads, dZ = decoder.backprop_cached(dec_cache, d_pred)
            enc_grads, _ = encoder.backprop_cached(enc_cache, dZ)
            for view, g in zip(grad_views, enc_grads + dec_grads):
                view[...] = g
            adam.step([flat], [grad_flat])
            total += loss * len(idx)
        history.append(total / n)
    return history
