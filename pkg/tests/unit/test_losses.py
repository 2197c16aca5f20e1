"""
Joint loss Unit Test Suite.

Test cases can be run with the following:
  pytest -v --cov=inversion --cov-report=term-missing --cov-branch
"""
import numpy as np
import pytest

from inversion.autodiff.tensor import Tensor
from inversion.configs import ModelConfig
from inversion.errors import ShapeError
from inversion.models import build_model, model_forward
from inversion.training.losses import joint_loss, total_loss
from tests import TEST_DEPTH, TINY_PROPOSED2D


class TestJointLoss:
    """The joint_loss Function Tests."""

    def test_perfect_prediction(self, rng):
        """It should be zero when both residuals vanish."""
        y = rng.standard_normal((2, 5))
        x = rng.standard_normal((2, 1, 5, 3))
        loss = total_loss(Tensor(y), Tensor(y), Tensor(x), Tensor(x))
        assert loss.item() == 0.0

    def test_weighted_sum(self):
        """It should give 2.5 for mse_y = 2, mse_x = 1, alpha 1, beta 0.5."""
        y_hat = Tensor(np.array([[2.0, 0.0]]))
        y = Tensor(np.array([[0.0, 2.0]]))
        x_hat = Tensor(np.ones((1, 1, 2, 1)))
        x = Tensor(np.zeros((1, 1, 2, 1)))
        result = joint_loss(y_hat, y, x_hat, x)
        assert result.loss_y == pytest.approx(4.0)
        assert result.loss_x == pytest.approx(1.0)
        assert result.total.item() == pytest.approx(4.5)
        y_hat = Tensor(np.array([[1.0, 1.0]]))
        y = Tensor(np.array([[-1.0, 1.0]]))
        assert total_loss(y_hat, y, x_hat, x).item() == pytest.approx(2.5)

    def test_non_negative(self, rng):
        """It should never be negative."""
        for _ in range(20):
            y_hat, y = rng.standard_normal((2, 4)), rng.standard_normal((2, 4))
            x_hat, x = rng.standard_normal((2, 1, 4, 1)), rng.standard_normal((2, 1, 4, 1))
            assert total_loss(Tensor(y_hat), Tensor(y), Tensor(x_hat), Tensor(x)).item() >= 0

    def test_beta_zero(self, rng):
        """It should reduce to the regression loss when beta is 0."""
        y_hat, y = Tensor(rng.standard_normal((2, 4))), Tensor(rng.standard_normal((2, 4)))
        x_hat = Tensor(rng.standard_normal((2, 1, 4, 1)))
        full = total_loss(y_hat, y, x_hat, Tensor(np.zeros((2, 1, 4, 1))), beta=0.0)
        assert full.item() == pytest.approx(joint_loss(y_hat, y, None, None).loss_y)

    def test_without_reconstruction(self, rng):
        """It should skip the reconstruction term when x_hat is None."""
        result = joint_loss(Tensor(np.ones((1, 3))), Tensor(np.zeros((1, 3))), None, None)
        assert result.loss_x == 0.0
        assert result.total.item() == pytest.approx(1.0)

    def test_shape_errors(self):
        """It should reject mismatched pairs and a missing input patch."""
        with pytest.raises(ShapeError):
            total_loss(Tensor(np.ones((1, 3))), Tensor(np.ones((1, 4))), None, None)
        with pytest.raises(ShapeError):
            total_loss(Tensor(np.ones((1, 3))), Tensor(np.ones((1, 3))),
                       Tensor(np.ones((1, 1, 3, 1))), None)

    @pytest.mark.parametrize('alpha,beta,silent_head', [
        (1.0, 0.0, 'reconstruction'),
        (0.0, 0.5, 'regression'),
    ])
    def test_gradient_separation(self, rng, alpha, beta, silent_head):
        """It should give exactly zero gradients to the head with zero weight."""
        config = ModelConfig(**TINY_PROPOSED2D)
        params = build_model(config, rng)
        x = Tensor(rng.standard_normal((2, 1, TEST_DEPTH, 3)).astype(np.float32))
        y = Tensor(rng.standard_normal((2, TEST_DEPTH)).astype(np.float32))
        y_hat, x_hat = model_forward(params, config, x)
        total_loss(y_hat, y, x_hat, x, alpha=alpha, beta=beta).backward()
        for name, tensor in params.named_tensors():
            if name.startswith(silent_head):
                assert tensor.grad is None or not np.any(tensor.grad), name
