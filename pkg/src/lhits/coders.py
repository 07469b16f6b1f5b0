"""Dimensionality reducers: a deep autoencoder, a linear PCA baseline, and a
pass-through coder for full-state operation.

All three follow the transformer contract: `transform` restricts a state
matrix to the reduced coordinates and `inverse_transform` lifts it back.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import ConfigError, ShapeError
from .nets import Mlp, fit_autoencoder_nets
from .utils import rng_for
from .validation import check_matrix


class Autoencoder(BaseEstimator, TransformerMixin):
    """MLP encoder/decoder pair trained to reconstruct its input.

    The encoder restricts an n-dimensional state to `latent_dim` coordinates
    through the hidden widths in `hidden`; the decoder mirrors them back to
    n. Requiring latent_dim < n is what forces a non-trivial compression.

    Parameters
    ----------
    latent_dim : size of the reduced coordinate vector (must be < n_features)
    hidden : encoder hidden-layer widths; the decoder uses them reversed
    activation : "relu" or "identity" (identity makes both maps linear)
    epochs, batch_size, learning_rate, seed : Adam training configuration

    Attributes
    ----------
    encoder_, decoder_ : trained Mlp halves
    loss_history_ : per-epoch mean reconstruction MSE, length == epochs
    """

    def __init__(self, latent_dim: int = 2, hidden=(100, 100, 100),
                 activation: str = "relu", epochs: int = 5000, batch_size: int = 32,
                 learning_rate: float = 1e-3, seed: int = 0):
        self.latent_dim = latent_dim
        self.hidden = hidden
        self.activation = activation
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.seed = seed

    def fit(self, X, y=None):
        X = check_matrix(X, "X")
        n = X.shape[1]
        z = int(self.latent_dim)
        if z >= n:
            raise ConfigError(f"latent_dim={z} must be smaller than the state dimension {n}")
        if X.shape[0] < int(self.batch_size):
            raise ShapeError(
                f"need at least batch_size={self.batch_size} rows to train, got {X.shape[0]}")
        hidden = [int(h) for h in self.hidden]
        rng = rng_for(self.seed, "autoencoder", "init")
        self.encoder_ = Mlp.initialize([n, *hidden, z], rng, activation=self.activation)
        self.decoder_ = Mlp.initialize([z, *reversed(hidden), n], rng,
                                       activation=self.activation)
        self.loss_history_ = fit_autoencoder_nets(
            self.encoder_, self.decoder_, X, epochs=self.epochs,
            batch_size=self.batch_size, learning_rate=self.learning_rate,
            seed=self.seed, stream_tags=("autoencoder",))
        self.n_features_in_ = n
        return self

    def transform(self, X):
        """Restrict states to latent coordinates."""
        return self.encoder_.forward(check_matrix(X, "X", n_cols=self.encoder_.input_dim))

    def inverse_transform(self, Z):
        """Lift latent coordinates back to full states."""
        return self.decoder_.forward(check_matrix(Z, "Z", n_cols=self.decoder_.input_dim))

    def reconstruction_mse(self, X) -> float:
        X = check_matrix(X, "X", n_cols=self.encoder_.input_dim)
        diff = self.inverse_transform(self.transform(X)) - X
        return float(np.mean(diff * diff))


class IdentityCoder(BaseEstimator, TransformerMixin):
    """Pass-through coder: the "latent" space is the full state space."""

    def fit(self, X, y=None):
        X = check_matrix(X, "X")
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        return check_matrix(X, "X", n_cols=getattr(self, "n_features_in_", None))

    def inverse_transform(self, Z):
        return check_matrix(Z, "Z", n_cols=getattr(self, "n_features_in_", None))

    def reconstruction_mse(self, X) -> float:
        check_matrix(X, "X", n_cols=getattr(self, "n_features_in_", None))
        return 0.0


class PcaReducer(BaseEstimator, TransformerMixin):
    """Rank-z linear reducer from the SVD of the mean-centered data.

    components_ is an (n, z) matrix with orthonormal columns holding the top
    principal directions; reconstruction is the orthogonal projection onto
    their span plus the mean.
    """

    def __init__(self, n_components: int = 2):
        self.n_components = n_components

    def fit(self, X, y=None):
        X = check_matrix(X, "X")
        z = int(self.n_components)
        if z < 1 or z > min(X.shape):
            raise ConfigError(
                f"n_components={z} must be in [1, min(rows, cols)] = "
                f"[1, {min(X.shape)}]")
        self.mean_ = X.mean(axis=0)
        centered = X - self.mean_
        _, _, vt = np.linalg.svd(centered, full_matrices=False)
        components = vt[:z].T
        # fix the sign convention so refits are reproducible
        signs = np.sign(components[np.argmax(np.abs(components), axis=0),
                                   np.arange(z)])
        signs[signs == 0] = 1.0
        self.components_ = components * signs
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        X = check_matrix(X, "X", n_cols=self.n_features_in_)
        return (X - self.mean_) @ self.components_

    def inverse_transform(self, Z):
        Z = check_matrix(Z, "Z", n_cols=self.components_.shape[1])
        return Z @ self.components_.T + self.mean_

    def reconstruction_mse(self, X) -> float:
        X = check_matrix(X, "X", n_cols=self.n_features_in_)
        diff = self.inverse_transform(self.transform(X)) - X
        return float(np.mean(diff * diff))


def pca_fit_reconstruct(X, n_components: int):
    """Fit a rank-z PCA to X and return (model, reconstruction MSE on X)."""
    model = PcaReducer(n_components=n_components).fit(X)
    return model, model.reconstruction_mse(X)
