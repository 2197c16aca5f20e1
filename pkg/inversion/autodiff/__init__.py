"""
Package: autodiff.

Minimal dense tensors with reverse-mode automatic differentiation, a
finite-difference gradient checker and the TNSR tensor file format.
"""
from __future__ import annotations

from inversion.autodiff.tensor import (
    ComputationGraph,
    ELEMENTWISE_KINDS,
    Tensor,
    add,
    backward,
    bias_add,
    elementwise,
    matmul,
    mean_all,
    mse,
    mul,
    neg,
    no_grad,
    pad,
    relu,
    reshape,
    scale,
    select,
    sigmoid,
    stack,
    sub,
    sum_all,
    tanh,
)
