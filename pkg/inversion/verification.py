"""
Randomized gradient verification suite.

Every differentiable op of the toolkit is checked against float64 central
differences: elementwise kinds, matmul, mse, conv2d, the temporal block,
the LSTM and whole networks at tiny sizes. Trials cycle through the cases;
trial ``k`` draws its data from ``default_rng([seed, k])``.
"""
from __future__ import annotations

import logging
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from inversion.autodiff.gradcheck import (
    DEFAULT_STEP,
    DEFAULT_TOL,
    MIN_STEP,
    gradient_check,
    resample_away_from_kinks,
)
from inversion.autodiff.tensor import ELEMENTWISE_KINDS, Tensor, elementwise, matmul, mse
from inversion.configs import ModelConfig
from inversion.models import ModelParams, build_model, model_forward
from inversion.nn.layers import Conv2DParams, conv2d, make_temporal_block, temporal_block_2d
from inversion.schemas import GradCheckReport

logger = logging.getLogger(__name__)

NETWORK_STEP = MIN_STEP
NETWORK_MAX_ELEMENTS = 12

Case = Tuple[Callable[..., Tensor], List[np.ndarray], Dict]
CaseBuilder = Callable[[np.random.Generator], Case]

TINY_MODELS = {
    'tcn1d': dict(variant='tcn1d', depth=10, block_channels=[3, 4],
                  dilations=[1, 2], head_channels=[4, 3], dropout_p=0.0),
    'proposed2d': dict(variant='proposed2d', patch_width=3, depth=8,
                       block_channels=[4, 120], dilations=[1, 2],
                       head_channels=[4, 3], dropout_p=0.0),
    'lstm': dict(variant='lstm', depth=8, lstm_hidden=4),
}


def _as_float64(params: ModelParams) -> ModelParams:
    for _, tensor in params.named_tensors():
        tensor.data = tensor.data.astype(np.float64)
    return params


######################################################################
# CASES
######################################################################
def _elementwise_case(kind: str) -> CaseBuilder:
    def build(rng: np.random.Generator) -> Case:
        a = resample_away_from_kinks(rng.standard_normal((3, 4)), DEFAULT_STEP, rng)
        if kind == 'scale':
            factor = float(rng.uniform(-2, 2))
            return (lambda x: elementwise('scale', x, factor)), [a], {}
        if kind in ('add', 'sub', 'mul'):
            b = rng.standard_normal((3, 4))
            return (lambda x, y: elementwise(kind, x, y)), [a, b], {}
        return (lambda x: elementwise(kind, x)), [a], {}
    return build


def _matmul_case(rng: np.random.Generator) -> Case:
    return matmul, [rng.standard_normal((3, 5)), rng.standard_normal((5, 2))], {}


def _mse_case(rng: np.random.Generator) -> Case:
    return mse, [rng.standard_normal((4, 6)), rng.standard_normal((4, 6))], {}


def _conv_case(causal: bool) -> CaseBuilder:
    def build(rng: np.random.Generator) -> Case:
        def op(x, w, b):
            return conv2d(x, Conv2DParams(w, b, dilation=(2, 1), padding=(2, 1),
                                          causal=causal))
        inputs = [rng.standard_normal((2, 2, 9, 5)),
                  rng.standard_normal((3, 2, 3, 3)),
                  rng.standard_normal(3)]
        return op, inputs, {}
    return build


def _temporal_block_case(rng: np.random.Generator) -> Case:
    block = make_temporal_block(2, 3, (3, 3), 2, rng)
    for conv in (block.conv1, block.conv2, block.downsample):
        conv.weight.data = conv.weight.data.astype(np.float64)
        conv.bias.data = rng.standard_normal(conv.out_channels)

    def op(x, w1, w2):
        block.conv1.weight = w1
        block.conv2.weight = w2
        return temporal_block_2d(x, block)

    inputs = [rng.standard_normal((2, 2, 8, 4)),
              block.conv1.weight.data.copy(),
              block.conv2.weight.data.copy()]
    return op, inputs, {'h': NETWORK_STEP}


def _lstm_case(rng: np.random.Generator) -> Case:
    config = ModelConfig(**TINY_MODELS['lstm'])
    params = _as_float64(build_model(config, rng))
    lstm = params.lstm

    def op(x, w_i, u_f, proj):
        lstm.input_weights['i'] = w_i
        lstm.recurrent_weights['f'] = u_f
        lstm.proj_weight = proj
        return model_forward(params, config, x)[0]

    inputs = [rng.standard_normal((2, 1, config.depth, 1)),
              lstm.input_weights['i'].data.copy(),
              lstm.recurrent_weights['f'].data.copy(),
              lstm.proj_weight.data.copy()]
    return op, inputs, {}


def _network_case(variant: str, output: int) -> CaseBuilder:
    def build(rng: np.random.Generator) -> Case:
        config = ModelConfig(**TINY_MODELS[variant])
        params = _as_float64(build_model(config, rng))
        for _, tensor in params.named_tensors():
            if tensor.ndim == 1:
                tensor.data = 0.1 * rng.standard_normal(tensor.shape)
        first, last = params.features[0].conv1, params.regression[-1]
        if output == 1:
            last = params.reconstruction[-1]

        def op(x, w_first, w_last):
            first.weight = w_first
            last.weight = w_last
            return model_forward(params, config, x)[output]

        inputs = [rng.standard_normal((2, 1, config.depth, config.patch_width)),
                  first.weight.data.copy(),
                  last.weight.data.copy()]
        return op, inputs, {'h': NETWORK_STEP, 'max_elements': NETWORK_MAX_ELEMENTS}
    return build


GRADIENT_CASES: Sequence[Tuple[str, CaseBuilder]] = (
    *[(f"elementwise.{kind}", _elementwise_case(kind)) for kind in ELEMENTWISE_KINDS],
    ('matmul', _matmul_case),
    ('mse', _mse_case),
    ('conv2d', _conv_case(causal=False)),
    ('conv2d.causal', _conv_case(causal=True)),
    ('temporal_block', _temporal_block_case),
    ('lstm', _lstm_case),
    ('model.tcn1d', _network_case('tcn1d', 0)),
    ('model.proposed2d', _network_case('proposed2d', 0)),
    ('model.proposed2d.reconstruction', _network_case('proposed2d', 1)),
)


######################################################################
# SUITE
######################################################################
def run_gradient_suite(
        trials: int = 100,
        seed: int = 1337,
        tol: float = DEFAULT_TOL
) -> List[GradCheckReport]:
    """Runs ``trials`` randomized checks, cycling through every case.

    Returns:
        One report per trial; nothing is raised on failure.
    """
    reports = []
    for trial in range(trials):
        name, build = GRADIENT_CASES[trial % len(GRADIENT_CASES)]
        rng = np.random.default_rng([seed, trial])
        op, inputs, options = build(rng)
        reports.append(gradient_check(op, inputs, tol=tol, name=name, rng=rng, **options))
    failed = [r.name for r in reports if not r.passed]
    if failed:
        logger.warning("Gradient suite: %d of %d checks failed: %s",
                       len(failed), trials, ', '.join(sorted(set(failed))))
    else:
        logger.info("Gradient suite: all %d checks passed", trials)
    return reports
