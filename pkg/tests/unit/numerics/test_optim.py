import numpy as np
import pytest

from ca2n.numerics import Optimizer, OptimizerState, Tape, Tensor, backward, ops
from ca2n.numerics.optim import optimizer_step


class TestOptimizerStep(object):
    def test_sgd(self):
        param = Tensor(0.0, trainable=True)
        state = OptimizerState(lr=0.1, mode="sgd")
        optimizer_step({"p": param}, {"p": np.array(1.0)}, state)
        assert param.item() == pytest.approx(-0.1)
        assert state.step == 1

    def test_zero_gradient_leaves_fresh_parameters_unchanged(self):
        param = Tensor([1.0, 2.0], trainable=True)
        state = OptimizerState()
        optimizer_step({"p": param}, {"p": np.zeros(2)}, state)
        np.testing.assert_array_equal(param.data, [1.0, 2.0])

    def test_zero_gradient_decays_moments(self):
        param = Tensor([1.0], trainable=True)
        state = OptimizerState()
        optimizer_step({"p": param}, {"p": np.array([0.5])}, state)
        first = state.first_moment["p"].copy()
        second = state.second_moment["p"].copy()
        optimizer_step({"p": param}, {"p": np.zeros(1)}, state)
        np.testing.assert_allclose(state.first_moment["p"], 0.9 * first)
        np.testing.assert_allclose(state.second_moment["p"], 0.999 * second)
        assert state.step == 2

    def test_first_adam_step_has_magnitude_lr(self):
        param = Tensor(np.zeros(3), trainable=True, dtype=np.float64)
        state = OptimizerState(lr=1e-3)
        optimizer_step({"p": param}, {"p": np.full(3, 0.37)}, state)
        np.testing.assert_allclose(np.abs(param.data), 1e-3, atol=1e-6)

    def test_missing_gradient_counts_as_zero(self):
        param = Tensor([1.0], trainable=True)
        optimizer_step({"p": param}, {}, OptimizerState(mode="sgd", lr=1.0))
        assert param.item() == 1.0

    def test_deterministic(self):
        def run():
            param = Tensor([0.3, -0.2], trainable=True)
            state = OptimizerState()
            for grad in ([0.1, 0.2], [-0.3, 0.05], [0.0, 0.4]):
                optimizer_step({"p": param}, {"p": np.array(grad)}, state)
            return param.numpy()

        np.testing.assert_array_equal(run(), run())

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            OptimizerState(mode="rmsprop")


def test_optimizer_maps_tape_gradients_by_name():
    weight = Tensor(2.0, trainable=True)
    optimizer = Optimizer({"weight": weight}, lr=0.5, mode="sgd")
    with Tape() as tape:
        loss = ops.mul(weight, weight)
    optimizer.step(backward(loss, tape))
    assert weight.item() == pytest.approx(0.0)
