import copy

import numpy as np
import pytest

from sdprel.errors import ShapeMismatch
from sdprel.optim import AdadeltaState, AdamState, adadelta_step, adam_step


def params_and_grads(seed=0):
    rng = np.random.Generator(np.random.PCG64(seed))
    params = {"w": rng.normal(size=(3, 4)), "b": rng.normal(size=4)}
    grads = {"w": rng.normal(size=(3, 4)), "b": rng.normal(size=4)}
    return params, grads


class TestAdam:
    def test_zero_gradient_no_change(self):
        params, _ = params_and_grads()
        snapshot = copy.deepcopy(params)
        state = AdamState()
        adam_step(state, params, {k: np.zeros_like(v) for k, v in params.items()})
        for k in params:
            assert np.array_equal(params[k], snapshot[k])

    def test_first_step_is_sign_scaled(self):
        # with t=1, m_hat = g and v_hat = g^2, so the update collapses to
        # -lr * g / (|g| + eps), i.e. the sign pattern of g scaled by lr
        params, grads = params_and_grads(1)
        snapshot = copy.deepcopy(params)
        state = AdamState(lr=0.001)
        adam_step(state, params, grads)
        for k in params:
            update = params[k] - snapshot[k]
            assert np.allclose(update, -0.001 * np.sign(grads[k]), atol=1e-6)

    def test_deterministic(self):
        params_a, grads = params_and_grads(2)
        params_b = copy.deepcopy(params_a)
        state_a, state_b = AdamState(), AdamState()
        for _ in range(5):
            adam_step(state_a, params_a, grads)
            adam_step(state_b, params_b, grads)
        for k in params_a:
            assert np.array_equal(params_a[k], params_b[k])

    def test_shape_mismatch(self):
        params, grads = params_and_grads(3)
        grads["w"] = grads["w"][:2]
        with pytest.raises(ShapeMismatch):
            adam_step(AdamState(), params, grads)

    def test_key_mismatch(self):
        params, grads = params_and_grads(4)
        del grads["b"]
        with pytest.raises(ShapeMismatch):
            adam_step(AdamState(), params, grads)

    def test_step_counter(self):
        params, grads = params_and_grads(5)
        state = AdamState()
        for expected in range(1, 4):
            adam_step(state, params, grads)
            assert state.step == expected


class TestAdadelta:
    def test_zero_gradient_no_change(self):
        params, _ = params_and_grads(6)
        snapshot = copy.deepcopy(params)
        adadelta_step(
            AdadeltaState(), params, {k: np.zeros_like(v) for k, v in params.items()}
        )
        for k in params:
            assert np.array_equal(params[k], snapshot[k])

    def test_constant_gradient_step_size_stabilizes(self):
        params = {"x": np.array([0.0])}
        grads = {"x": np.array([0.5])}
        state = AdadeltaState()
        positions = [params["x"][0]]
        for _ in range(1500):
            adadelta_step(state, params, grads)
            positions.append(params["x"][0])
        steps = np.abs(np.diff(positions))
        tail = steps[-100:]
        assert np.all(steps > 0)
        # late steps hover around a steady magnitude
        assert tail.std() / tail.mean() < 0.01

    def test_descends_a_quadratic(self):
        params = {"x": np.array([4.0])}
        state = AdadeltaState()
        for _ in range(3000):
            adadelta_step(state, params, {"x": 2.0 * params["x"]})
        assert abs(params["x"][0]) < 1.0

    def test_deterministic(self):
        params_a, grads = params_and_grads(7)
        params_b = copy.deepcopy(params_a)
        state_a, state_b = AdadeltaState(), AdadeltaState()
        for _ in range(5):
            adadelta_step(state_a, params_a, grads)
            adadelta_step(state_b, params_b, grads)
        for k in params_a:
            assert np.array_equal(params_a[k], params_b[k])

    def test_shape_mismatch(self):
        params, grads = params_and_grads(8)
        grads["b"] = np.zeros(9)
        with pytest.raises(ShapeMismatch):
            adadelta_step(AdadeltaState(), params, grads)
