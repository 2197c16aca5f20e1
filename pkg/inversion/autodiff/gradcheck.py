"""
Central finite-difference gradient checking.

The op under test is scalarized with a fixed random projection
``sum(op(*inputs) * P)`` so every output element contributes, then each
selected input coordinate is perturbed by ``±h`` in float64.
"""
from __future__ import annotations

import logging
from typing import Callable, List, Optional, Sequence

import numpy as np

from inversion.autodiff.tensor import Tensor, backward, mul, no_grad, sum_all
from inversion.errors import ConfigError
from inversion.schemas import GradCheckReport

logger = logging.getLogger(__name__)

DEFAULT_STEP = 1e-5
DEFAULT_TOL = 1e-4
MIN_STEP = 1e-6
MAX_STEP = 1e-4


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    """|a - n| / max(1, |a|, |n|), elementwise."""
    denom = np.maximum(1.0, np.maximum(np.abs(analytic), np.abs(numeric)))
    return np.abs(analytic - numeric) / denom


def gradient_check(
        op: Callable[..., Tensor],
        inputs: Sequence[np.ndarray],
        h: float = DEFAULT_STEP,
        tol: float = DEFAULT_TOL,
        name: str = 'op',
        rng: Optional[np.random.Generator] = None,
        max_elements: Optional[int] = None,
) -> GradCheckReport:
    """Compares backward-pass gradients of ``op`` with central differences.

    Args:
        op: Callable taking one Tensor per entry of ``inputs``.
        inputs: Input values; all are differentiated (cast to float64).
        h: Perturbation step.
        tol: Pass threshold on the maximum relative error.
        name: Label carried by the report.
        rng: Source of the output projection and coordinate subsampling.
        max_elements: Check at most this many random coordinates per input.

    Returns:
        GradCheckReport: Never raises on mismatch; the report carries it.

    Raises:
        ConfigError: If ``h`` lies outside [1e-6, 1e-4].
    """
    if not MIN_STEP <= h <= MAX_STEP:
        raise ConfigError(
            f"gradient_check step h must lie in [{MIN_STEP}, {MAX_STEP}], got {h}"
        )
    rng = rng if rng is not None else np.random.default_rng(0)
    values = [np.array(x, dtype=np.float64) for x in inputs]

    leaves = [Tensor(v.copy(), requires_grad=True) for v in values]
    out = op(*leaves)
    projection = rng.standard_normal(out.shape)
    loss = sum_all(mul(out, Tensor(projection)))
    backward(loss)

    def evaluate(arrays: List[np.ndarray]) -> float:
        with no_grad():
            result = op(*[Tensor(a) for a in arrays])
        return float(np.sum(result.data * projection))

    worst = 0.0
    checked = 0
    for position, leaf in enumerate(leaves):
        analytic = leaf.grad if leaf.grad is not None else np.zeros_like(leaf.data)
        flat_count = values[position].size
        coords = np.arange(flat_count)
        if max_elements is not None and flat_count > max_elements:
            coords = np.sort(rng.choice(flat_count, size=max_elements, replace=False))
        for flat in coords:
            index = np.unravel_index(flat, values[position].shape)
            shifted = [v.copy() for v in values]
            shifted[position][index] += h
            f_plus = evaluate(shifted)
            shifted[position][index] -= 2 * h
            f_minus = evaluate(shifted)
            numeric = (f_plus - f_minus) / (2 * h)
            err = float(relative_error(np.asarray(analytic[index]), np.asarray(numeric)))
            worst = max(worst, err)
            checked += 1

    report = GradCheckReport(
        name=name,
        max_rel_error=worst,
        tol=tol,
        checked=checked,
        passed=worst < tol,
    )
    level = logging.DEBUG if report.passed else logging.WARNING
    logger.log(level, "Gradient check '%s': max rel error %.3e over %d elements",
               name, worst, checked)
    return report


def resample_away_from_kinks(
        values: np.ndarray,
        h: float,
        rng: np.random.Generator
) -> np.ndarray:
    """Redraws entries with |x| < 10h so ReLU-style kinks are not straddled."""
    values = np.array(values, dtype=np.float64)
    mask = np.abs(values) < 10 * h
    while np.any(mask):
        values[mask] = rng.standard_normal(int(mask.sum()))
        mask = np.abs(values) < 10 * h
    return values
