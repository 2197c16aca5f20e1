"""
Joint regression / reconstruction loss.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from inversion.autodiff.tensor import Tensor, add, mse, scale
from inversion.errors import ShapeError


@dataclass(frozen=True)
class JointLoss:
    """The differentiable total and its two unweighted parts."""
    total: Tensor
    loss_y: float
    loss_x: float


def joint_loss(
        y_hat: Tensor,
        y: Tensor,
        x_hat: Optional[Tensor],
        x: Optional[Tensor],
        alpha: float = 1.0,
        beta: float = 0.5,
) -> JointLoss:
    """alpha * mse(y_hat, y) + beta * mse(x_hat, x).

    The reconstruction term is dropped when ``x_hat`` is None (the LSTM
    has no reconstruction head).

    Raises:
        ShapeError: If a prediction/target pair differs in shape.
    """
    regression = mse(y_hat, y)
    total = scale(regression, alpha)
    loss_x = 0.0
    if x_hat is not None:
        if x is None:
            raise ShapeError('reconstruction output given without its input patch')
        reconstruction = mse(x_hat, x)
        total = add(total, scale(reconstruction, beta))
        loss_x = reconstruction.item()
    return JointLoss(total=total, loss_y=regression.item(), loss_x=loss_x)


def total_loss(
        y_hat: Tensor,
        y: Tensor,
        x_hat: Optional[Tensor],
        x: Optional[Tensor],
        alpha: float = 1.0,
        beta: float = 0.5,
) -> Tensor:
    """Scalar joint loss; see :func:`joint_loss`."""
    return joint_loss(y_hat, y, x_hat, x, alpha, beta).total
