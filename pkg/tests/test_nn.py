"""Tests for the dense-network engine."""

import math

import numpy as np
import pytest

from src.exceptions import ShapeError, TrainingDivergenceError
from src.nn import (
    ACTIVATIONS,
    DenseNet,
    Layer,
    adam_step,
    backward,
    bce,
    forward,
    init_net,
    init_state,
    mse,
    net_from_dict,
    net_to_dict,
    state_from_dict,
    state_to_dict,
)


def _numeric_gradient(f, arrays, h=1e-5):
    """Central differences of f() w.r.t. every entry of every array (mutated in place)."""
    out = []
    for a in arrays:
        g = np.zeros_like(a)
        for idx in np.ndindex(a.shape):
            old = a[idx]
            a[idx] = old + h
            up = f()
            a[idx] = old - h
            down = f()
            a[idx] = old
            g[idx] = (up - down) / (2 * h)
        out.append(g)
    return out


class TestInit:
    def test_deterministic(self):
        a = init_net([16, 8, 16], ["relu", "tanh"], seed=5)
        b = init_net([16, 8, 16], ["relu", "tanh"], seed=5)
        assert all(np.array_equal(p, q) for p, q in zip(a.params(), b.params()))

    def test_seed_matters(self):
        a = init_net([16, 16], ["tanh"], seed=1)
        b = init_net([16, 16], ["tanh"], seed=2)
        assert not np.array_equal(a.layers[0].weight, b.layers[0].weight)

    def test_glorot_bound_and_zero_biases(self):
        net = init_net([16, 16, 4], ["relu", "sigmoid"], seed=0)
        assert np.abs(net.layers[0].weight).max() <= math.sqrt(6 / 32)
        assert np.abs(net.layers[1].weight).max() <= math.sqrt(6 / 20)
        assert all(not layer.bias.any() for layer in net.layers)
        assert net.dims == [16, 16, 4]
        assert net.layers[0].weight.shape == (16, 16)
        assert net.layers[1].weight.shape == (4, 16)

    def test_mismatched_activations(self):
        with pytest.raises(ShapeError):
            init_net([16, 8, 16], ["relu"], seed=0)

    def test_unknown_activation(self):
        with pytest.raises(ShapeError):
            init_net([2, 2], ["softmax"], seed=0)

    def test_non_positive_width(self):
        with pytest.raises(ShapeError):
            init_net([2, 0], ["relu"], seed=0)

    def test_layers_must_chain(self):
        a = Layer(weight=np.zeros((3, 2)), bias=np.zeros(3), activation="relu")
        b = Layer(weight=np.zeros((1, 4)), bias=np.zeros(1), activation="relu")
        with pytest.raises(ShapeError):
            DenseNet(layers=(a, b))


class TestForward:
    def test_zero_net(self):
        net = DenseNet(layers=(Layer(weight=np.zeros((3, 2)), bias=np.zeros(3), activation="sigmoid"),))
        assert forward(net, np.ones((4, 2))).tolist() == [[0.5] * 3] * 4

    def test_hand_computed(self):
        layer = Layer(weight=np.array([[1.0, 2.0], [3.0, 4.0]]), bias=np.array([0.5, -1.0]), activation="identity")
        net = DenseNet(layers=(layer,))
        assert forward(net, np.array([[1.0, 1.0], [0.0, -1.0]])).tolist() == [[3.5, 6.0], [-1.5, -5.0]]
        relu = DenseNet(layers=(Layer(weight=layer.weight, bias=layer.bias, activation="relu"),))
        assert forward(relu, np.array([[0.0, -1.0]])).tolist() == [[0.0, 0.0]]
        tanh = DenseNet(layers=(Layer(weight=layer.weight, bias=layer.bias, activation="tanh"),))
        np.testing.assert_allclose(forward(tanh, np.array([[1.0, 1.0]])), [[math.tanh(3.5), math.tanh(6.0)]])

    def test_rows_independent(self, rng):
        net = init_net([16, 8, 16], ["relu", "tanh"], seed=3)
        x = rng.normal(size=(10, 16))
        perm = rng.permutation(10)
        np.testing.assert_allclose(forward(net, x)[perm], forward(net, x[perm]))

    def test_sigmoid_saturates_without_overflow(self):
        net = DenseNet(layers=(Layer(weight=np.array([[1.0]]), bias=np.zeros(1), activation="sigmoid"),))
        with np.errstate(over="raise"):
            out = forward(net, np.array([[-1000.0], [1000.0]]))
        assert out.tolist() == [[0.0], [1.0]]

    def test_wrong_width(self):
        net = init_net([16, 16], ["tanh"], seed=0)
        with pytest.raises(ShapeError):
            forward(net, np.zeros((2, 15)))


class TestBackward:
    @pytest.mark.parametrize("activation", ACTIVATIONS)
    @pytest.mark.parametrize("loss", ["mse", "bce"])
    def test_matches_finite_differences(self, activation, loss, rng):
        last = "sigmoid" if loss == "bce" else activation
        net = init_net([4, 5, 3], [activation, last], seed=11)
        # Non-zero biases keep relu away from its kink at the seeded inputs.
        net = net.with_params([p + 0.1 if p.ndim == 1 else p for p in net.params()])
        x = rng.normal(size=(6, 4))
        target = rng.uniform(0, 1, size=(6, 3)) if loss == "bce" else rng.normal(size=(6, 3))
        loss_fn = bce if loss == "bce" else mse

        params = [p.copy() for p in net.params()]

        def value():
            return loss_fn(forward(net.with_params(params), x), target)[0]

        _, upstream = loss_fn(forward(net, x), target)
        grads = backward(net, x, upstream)
        numeric = _numeric_gradient(value, params)
        for analytic, approx in zip(grads.params, numeric):
            np.testing.assert_allclose(analytic, approx, rtol=1e-4, atol=1e-8)

        x_var = x.copy()
        numeric_x = _numeric_gradient(lambda: loss_fn(forward(net, x_var), target)[0], [x_var])[0]
        np.testing.assert_allclose(grads.inputs, numeric_x, rtol=1e-4, atol=1e-8)

    def test_zero_upstream(self, rng):
        net = init_net([16, 16], ["tanh"], seed=0)
        grads = backward(net, rng.normal(size=(3, 16)), np.zeros((3, 16)))
        assert all(not g.any() for g in grads.params)
        assert not grads.inputs.any()

    def test_linear_in_upstream(self, rng):
        net = init_net([4, 3], ["tanh"], seed=0)
        x = rng.normal(size=(5, 4))
        g1, g2 = rng.normal(size=(5, 3)), rng.normal(size=(5, 3))
        a = backward(net, x, g1).params
        b = backward(net, x, g2).params
        c = backward(net, x, 2.0 * g1 + 3.0 * g2).params
        for pa, pb, pc in zip(a, b, c):
            np.testing.assert_allclose(pc, 2.0 * pa + 3.0 * pb, atol=1e-12)

    def test_upstream_shape_checked(self):
        net = init_net([4, 3], ["tanh"], seed=0)
        with pytest.raises(ShapeError):
            backward(net, np.zeros((2, 4)), np.zeros((2, 4)))


class TestAdam:
    def test_zero_gradient_keeps_params(self):
        net = init_net([4, 3], ["tanh"], seed=0)
        new, state = adam_step(net, [np.zeros_like(p) for p in net.params()], init_state(net))
        assert state.step == 1
        assert all(np.array_equal(p, q) for p, q in zip(net.params(), new.params()))

    def test_first_step_moves_by_learning_rate(self):
        net = init_net([4, 3], ["tanh"], seed=0)
        new, _ = adam_step(net, [np.ones_like(p) for p in net.params()], init_state(net, learning_rate=0.1))
        for p, q in zip(net.params(), new.params()):
            np.testing.assert_allclose(q - p, -0.1, rtol=1e-6)

    def test_non_finite_gradient(self):
        net = init_net([4, 3], ["tanh"], seed=0)
        grads = [np.zeros_like(p) for p in net.params()]
        grads[1][0] = np.nan
        with pytest.raises(TrainingDivergenceError):
            adam_step(net, grads, init_state(net))

    def test_gradient_shapes_checked(self):
        net = init_net([4, 3], ["tanh"], seed=0)
        with pytest.raises(ShapeError):
            adam_step(net, [np.zeros(3)], init_state(net))

    def test_descends_quadratic(self, rng):
        net = init_net([4, 4], ["identity"], seed=0)
        x = rng.normal(size=(20, 4))
        state = init_state(net, learning_rate=0.05)
        start = mse(forward(net, x), x)[0]
        for _ in range(200):
            _, g = mse(forward(net, x), x)
            net, state = adam_step(net, backward(net, x, g).params, state)
        assert mse(forward(net, x), x)[0] < start / 10


class TestLosses:
    def test_mse_values(self):
        assert mse(np.zeros(4), np.zeros(4))[0] == 0.0
        assert mse(np.array([1.0, 2.0]), np.array([0.0, 0.0]))[0] == 2.5

    def test_mse_gradient(self):
        _, g = mse(np.array([[1.0, 2.0]]), np.array([[0.0, 0.0]]))
        assert g.tolist() == [[1.0, 2.0]]

    def test_bce_half(self):
        assert bce(np.array([0.5]), np.array([1.0]))[0] == pytest.approx(math.log(2))

    def test_bce_clamped(self):
        value, grad = bce(np.array([0.0, 1.0]), np.array([1.0, 0.0]))
        assert math.isfinite(value)
        assert np.all(np.isfinite(grad))
        assert value == pytest.approx(-math.log(1e-7))

    def test_bce_gradient_zero_where_clamped(self):
        prob = np.array([0.0, 1.0, 1e-9, 0.3])
        _, grad = bce(prob, np.array([1.0, 0.0, 1.0, 1.0]))
        assert grad[:3].tolist() == [0.0, 0.0, 0.0]
        assert grad[3] == pytest.approx(-1.0 / 0.3 / 4)
        h = 1e-8
        shifted = prob.copy()
        shifted[0] += h
        before, _ = bce(prob, np.array([1.0, 0.0, 1.0, 1.0]))
        after, _ = bce(shifted, np.array([1.0, 0.0, 1.0, 1.0]))
        assert after == before

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            mse(np.zeros(3), np.zeros(4))


class TestCheckpoints:
    def test_net_round_trip(self):
        net = init_net([16, 8, 16], ["relu", "tanh"], seed=9)
        back = net_from_dict(net_to_dict(net))
        assert back.dims == net.dims and back.activations == net.activations and back.seed == 9
        assert all(np.array_equal(p, q) for p, q in zip(net.params(), back.params()))

    def test_net_wrong_sizes(self):
        data = net_to_dict(init_net([4, 3], ["tanh"], seed=0))
        data["params"][0] = data["params"][0][:-1]
        with pytest.raises(ShapeError):
            net_from_dict(data)

    def test_state_round_trip(self):
        net = init_net([4, 3], ["tanh"], seed=0)
        _, state = adam_step(net, [np.ones_like(p) for p in net.params()], init_state(net, learning_rate=0.01))
        back = state_from_dict(state_to_dict(state))
        assert back.step == 1 and back.learning_rate == 0.01
        assert all(np.array_equal(a, b) for a, b in zip(state.m + state.v, back.m + back.v))
