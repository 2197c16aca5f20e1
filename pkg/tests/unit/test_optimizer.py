"""
Adam optimizer Unit Test Suite.

Test cases can be run with the following:
  pytest -v --cov=inversion --cov-report=term-missing --cov-branch
"""
import numpy as np
import pytest

from inversion.autodiff.tensor import Tensor
from inversion.errors import ShapeError
from inversion.training.optimizer import Adam, AdamState, adam_step
from tests import quick_train_config


def leaf(values):
    """Trainable float64 leaf."""
    return Tensor(np.array(values, dtype=np.float64), requires_grad=True)


class TestAdamStep:
    """The adam_step Function Tests."""

    def test_zero_grad_no_decay(self):
        """It should leave params unchanged for zero grads and no decay."""
        param = leaf([1.0, -2.0])
        state = AdamState.zeros_like([param])
        adam_step([param], [np.zeros(2)], state, lr=0.1)
        np.testing.assert_array_equal(param.numpy(), [1.0, -2.0])
        assert state.t == 1

    def test_first_step_sign(self):
        """It should move each element by about lr against its gradient."""
        param = leaf([0.0, 0.0, 0.0])
        state = AdamState.zeros_like([param])
        adam_step([param], [np.array([3.0, -0.01, 250.0])], state, lr=0.001)
        np.testing.assert_allclose(param.numpy(), [-0.001, 0.001, -0.001], rtol=1e-4)

    def test_step_bound(self, rng):
        """It should bound first-step updates by lr."""
        param = leaf(rng.standard_normal(100))
        before = param.numpy().copy()
        adam_step([param], [rng.standard_normal(100)], AdamState.zeros_like([param]), lr=0.01)
        assert np.all(np.abs(param.numpy() - before) <= 0.01 * (1 + 1e-6))

    def test_pure_shrinkage(self):
        """It should shrink by (1 - lr * wd) with zero grads."""
        param = leaf([2.0, -4.0])
        adam_step([param], [None], AdamState.zeros_like([param]), lr=0.1, weight_decay=0.5)
        np.testing.assert_allclose(param.numpy(), [2.0 * 0.95, -4.0 * 0.95])

    def test_moments(self):
        """It should accumulate moments with the configured decay rates."""
        param = leaf([0.0])
        state = AdamState.zeros_like([param])
        adam_step([param], [np.array([2.0])], state, lr=0.1, betas=(0.5, 0.75))
        np.testing.assert_allclose(state.m[0], [1.0])
        np.testing.assert_allclose(state.v[0], [1.0])

    def test_dtype_kept(self):
        """It should keep float32 params and moments in float32."""
        param = Tensor(np.ones(3, dtype=np.float32), requires_grad=True)
        state = AdamState.zeros_like([param])
        adam_step([param], [np.ones(3, dtype=np.float32)], state, lr=0.1, weight_decay=0.1)
        assert param.dtype == np.float32
        assert state.m[0].dtype == np.float32

    def test_shape_errors(self):
        """It should reject count and shape mismatches."""
        param = leaf([1.0, 2.0])
        with pytest.raises(ShapeError):
            adam_step([param], [], AdamState.zeros_like([param]), lr=0.1)
        with pytest.raises(ShapeError):
            adam_step([param], [np.zeros(3)], AdamState.zeros_like([param]), lr=0.1)


class TestAdam:
    """The Adam Class Tests."""

    def test_minimizes_quadratic(self):
        """It should drive a quadratic toward its minimum."""
        param = leaf([5.0, -3.0])
        optimizer = Adam([param], quick_train_config(lr=0.1, weight_decay=0.0))
        for _ in range(300):
            optimizer.zero_grad()
            ((param - 1.0) * (param - 1.0)).sum().backward()
            optimizer.step()
        np.testing.assert_allclose(param.numpy(), [1.0, 1.0], atol=0.05)
        assert optimizer.state.t == 300
