"""
Adam with decoupled weight decay.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from inversion.autodiff.tensor import Tensor
from inversion.configs import TrainConfig
from inversion.errors import ShapeError

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    """First and second moments per parameter, plus the step counter."""
    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)
    t: int = 0

    @classmethod
    def zeros_like(cls, params: Sequence[Tensor]) -> 'AdamState':
        """Fresh state mirroring ``params``."""
        return cls(
            m=[np.zeros_like(p.data) for p in params],
            v=[np.zeros_like(p.data) for p in params],
            t=0,
        )


def adam_step(
        params: Sequence[Tensor],
        grads: Sequence[Optional[np.ndarray]],
        state: AdamState,
        lr: float,
        betas: Tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
        weight_decay: float = 0.0,
) -> AdamState:
    """Updates ``params`` in place and advances ``state``.

    theta <- theta - lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * theta).
    A missing gradient counts as zero.

    Raises:
        ShapeError: If params, grads and moments disagree in count or shape.
    """
    if not len(params) == len(grads) == len(state.m) == len(state.v):
        raise ShapeError(
            f"adam_step got {len(params)} params, {len(grads)} grads and "
            f"{len(state.m)} moments"
        )
    beta1, beta2 = betas
    state.t += 1
    correction1 = 1.0 - beta1 ** state.t
    correction2 = 1.0 - beta2 ** state.t
    for index, (param, grad) in enumerate(zip(params, grads)):
        if grad is None:
            grad = np.zeros_like(param.data)
        if grad.shape != param.shape or state.m[index].shape != param.shape:
            raise ShapeError(
                f"adam_step parameter {index}: param {param.shape}, grad {grad.shape}, "
                f"moment {state.m[index].shape}"
            )
        dtype = param.data.dtype
        m = beta1 * state.m[index] + (1.0 - beta1) * grad
        v = beta2 * state.v[index] + (1.0 - beta2) * grad * grad
        state.m[index] = m.astype(dtype, copy=False)
        state.v[index] = v.astype(dtype, copy=False)
        m_hat = state.m[index] / correction1
        v_hat = state.v[index] / correction2
        update = m_hat / (np.sqrt(v_hat) + eps) + weight_decay * param.data
        param.data = (param.data - lr * update).astype(dtype, copy=False)
    return state


class Adam:
    """Adam over a fixed parameter list, configured from a TrainConfig."""

    def __init__(
            self,
            params: Sequence[Tensor],
            config: TrainConfig,
            state: Optional[AdamState] = None
    ) -> None:
        self.params = list(params)
        self.config = config
        self.state = state if state is not None else AdamState.zeros_like(self.params)

    def step(self) -> None:
        """Applies one update using each parameter's ``grad``."""
        adam_step(
            self.params,
            [p.grad for p in self.params],
            self.state,
            lr=self.config.lr,
            betas=tuple(self.config.adam_betas),
            eps=self.config.adam_eps,
            weight_decay=self.config.weight_decay,
        )

    def zero_grad(self) -> None:
        """Clears gradients of every parameter."""
        for param in self.params:
            param.zero_grad()
