"""Forward/backward/optimizer oracles for the dense network core."""

import numpy as np
import pytest

from lhits.errors import ShapeError, TrainingError
from lhits.nets import Adam, Mlp, fit_mlp, mse_loss
from lhits.utils import rng_for


def random_mlp(rng, max_layers=4, max_dim=16, activation="relu"):
    n_layers = int(rng.integers(1, max_layers + 1))
    dims = [int(rng.integers(1, max_dim + 1)) for _ in range(n_layers + 1)]
    net = Mlp.initialize(dims, rng_for(int(rng.integers(0, 2**31)), "test-init"),
                         activation=activation)
    # nudge biases off zero so ReLU patterns are generic
    for b in net.biases:
        b += rng.normal(scale=0.1, size=b.shape)
    return net


def finite_difference_grads(net, X, d_out, h=1e-6):
    """Central finite differences of sum(forward(X) * d_out) per parameter."""
    grads = []
    for p in net.parameters():
        g = np.zeros_like(p)
        flat = p.ravel()
        gflat = g.ravel()
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + h
            up = float(np.sum(net.forward(X) * d_out))
            flat[i] = keep - h
            down = float(np.sum(net.forward(X) * d_out))
            flat[i] = keep
            gflat[i] = (up - down) / (2 * h)
        grads.append(g)
    return grads


class TestMlpForward:
    def test_zero_network_maps_to_zero(self):
        net = Mlp([3, 4, 2], [np.zeros((3, 4)), np.zeros((4, 2))],
                  [np.zeros(4), np.zeros(2)])
        X = np.arange(6.0).reshape(2, 3)
        assert np.array_equal(net.forward(X), np.zeros((2, 2)))

    def test_hand_composed_relu_net(self):
        # 1 -> 2 -> 1, W1 = [[1, -1]], ReLU, W2 = [[1], [1]]: x=1 gives
        # hidden (1, 0) and output 1
        net = Mlp([1, 2, 1], [np.array([[1.0, -1.0]]), np.array([[1.0], [1.0]])],
                  [np.zeros(2), np.zeros(1)])
        out = net.forward(np.array([[1.0]]))
        assert out.shape == (1, 1)
        assert out[0, 0] == pytest.approx(1.0, abs=1e-15)

    def test_identity_network_is_identity(self, rng):
        eye = np.eye(3)
        net = Mlp([3, 3, 3], [eye.copy(), eye.copy()], [np.zeros(3), np.zeros(3)],
                  activation="identity")
        X = rng.normal(size=(5, 3))
        assert np.allclose(net.forward(X), X, atol=1e-15)

    def test_empty_batch(self):
        net = Mlp.initialize([3, 5, 2], rng_for(0, "t"))
        assert net.forward(np.zeros((0, 3))).shape == (0, 2)

    def test_dimension_mismatch_raises(self):
        net = Mlp.initialize([3, 5, 2], rng_for(0, "t"))
        with pytest.raises(ShapeError):
            net.forward(np.zeros((4, 7)))


class TestBackprop:
    def test_zero_cotangent_gives_zero_grads(self, rng):
        net = random_mlp(rng)
        X = rng.normal(size=(3, net.input_dim))
        grads, dX = net.backprop(X, np.zeros((3, net.output_dim)))
        assert all(np.array_equal(g, np.zeros_like(g)) for g in grads)
        assert np.array_equal(dX, np.zeros_like(X))

    def test_single_linear_layer_matrix_calculus(self, rng):
        # y = X W: dW = X^T G, db = sum G, dX = G W^T
        W = rng.normal(size=(4, 3))
        net = Mlp([4, 3], [W], [np.zeros(3)], activation="identity")
        X = rng.normal(size=(5, 4))
        G = rng.normal(size=(5, 3))
        grads, dX = net.backprop(X, G)
        assert np.allclose(grads[0], X.T @ G, atol=1e-12)
        assert np.allclose(grads[1], G.sum(axis=0), atol=1e-12)
        assert np.allclose(dX, G @ W.T, atol=1e-12)

    @pytest.mark.parametrize("trial", range(12))
    def test_matches_finite_differences(self, trial):
        rng = np.random.default_rng(1000 + trial)
        net = random_mlp(rng)
        X = rng.normal(size=(3, net.input_dim))
        d_out = rng.normal(size=(3, net.output_dim))
        grads, _ = net.backprop(X, d_out)
        fd = finite_difference_grads(net, X, d_out)
        for g, ref in zip(grads, fd):
            denom = np.maximum(np.abs(ref), 1e-3)
            assert np.max(np.abs(g - ref) / denom) < 1e-6


class TestMseLoss:
    def test_identical_inputs_give_zero(self, rng):
        X = rng.normal(size=(4, 3))
        loss, grad = mse_loss(X, X.copy())
        assert loss == 0.0
        assert np.array_equal(grad, np.zeros_like(X))

    def test_arithmetic_oracle(self):
        loss, grad = mse_loss(np.array([[1.0, 1.0]]), np.array([[0.0, 0.0]]))
        assert loss == pytest.approx(1.0)
        assert np.allclose(grad, np.array([[1.0, 1.0]]))

    def test_quadratic_homogeneity(self, rng):
        pred = rng.normal(size=(3, 3))
        target = rng.normal(size=(3, 3))
        base, _ = mse_loss(pred, target)
        scaled, _ = mse_loss(target + 3.0 * (pred - target), target)
        assert scaled == pytest.approx(9.0 * base, rel=1e-12)

    def test_nonnegative_and_zero_iff_equal(self, rng):
        pred = rng.normal(size=(4, 2))
        target = pred + 1e-9
        loss, _ = mse_loss(pred, target)
        assert loss > 0.0

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            mse_loss(np.zeros((2, 2)), np.zeros((2, 3)))


class TestAdam:
    def test_zero_gradient_is_fixed_point(self, rng):
        params = [rng.normal(size=(3, 2)), rng.normal(size=2)]
        before = [p.copy() for p in params]
        adam = Adam(params, learning_rate=0.1)
        adam.step(params, [np.zeros_like(p) for p in params])
        assert adam.step_count == 1
        for p, ref in zip(params, before):
            assert np.array_equal(p, ref)

    def test_hand_computed_first_step(self):
        # w=1, g=2, lr=0.1: bias-corrected m_hat=2, v_hat=4, w -> 1 - 0.1*2/2
        params = [np.array([1.0])]
        adam = Adam(params, learning_rate=0.1)
        adam.step(params, [np.array([2.0])])
        assert params[0][0] == pytest.approx(0.9, abs=1e-8)

    def test_deterministic_given_state(self, rng):
        g = [rng.normal(size=(2, 2))]
        p1 = [np.ones((2, 2))]
        p2 = [np.ones((2, 2))]
        a1 = Adam(p1, learning_rate=0.01)
        a2 = Adam(p2, learning_rate=0.01)
        for _ in range(3):
            a1.step(p1, [g[0].copy()])
            a2.step(p2, [g[0].copy()])
        assert np.array_equal(p1[0], p2[0])

    def test_non_finite_gradient_names_parameter(self):
        params = [np.ones(2), np.ones(3)]
        adam = Adam(params)
        bad = [np.ones(2), np.array([1.0, np.nan, 1.0])]
        with pytest.raises(TrainingError, match="parameter 1"):
            adam.step(params, bad)


class TestFitMlp:
    def test_learns_exact_linear_map(self, rng):
        A = np.array([[0.9, 0.1], [-0.2, 0.8]])
        X = rng.normal(size=(256, 2))
        Y = X @ A
        net = Mlp.initialize([2, 16, 2], rng_for(7, "fit-test"))
        history = fit_mlp(net, X, Y, epochs=2500, batch_size=64,
                          learning_rate=5e-3, seed=7)
        assert len(history) == 2500
        assert history[-1] < 1e-6
        assert history[-1] <= history[0]

    def test_zero_epochs_leaves_network_unchanged(self, rng):
        net = Mlp.initialize([2, 4, 2], rng_for(3, "zero-epochs"))
        before = [p.copy() for p in net.parameters()]
        history = fit_mlp(net, rng.normal(size=(16, 2)), rng.normal(size=(16, 2)),
                          epochs=0, batch_size=4, learning_rate=1e-3, seed=0)
        assert history == []
        for p, ref in zip(net.parameters(), before):
            assert np.array_equal(p, ref)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_non_finite_loss_aborts_with_epoch_index(self, rng):
        # an absurd learning rate blows the parameters up within a few epochs
        net = Mlp.initialize([2, 8, 2], rng_for(1, "blowup"))
        X = rng.normal(size=(32, 2))
        Y = rng.normal(size=(32, 2))
        with pytest.raises(TrainingError, match="epoch"):
            fit_mlp(net, X, Y, epochs=500, batch_size=8, learning_rate=1e12,
                    seed=1)

    def test_bit_identical_given_seed(self, rng):
        X = rng.normal(size=(64, 3))
        Y = rng.normal(size=(64, 3))
        nets = []
        for _ in range(2):
            net = Mlp.initialize([3, 8, 3], rng_for(11, "determinism"))
            fit_mlp(net, X, Y, epochs=25, batch_size=8, learning_rate=1e-3, seed=11)
            nets.append(net)
        for p, q in zip(nets[0].parameters(), nets[1].parameters()):
            assert np.array_equal(p, q)
