"""
Network assembly: the spatiotemporal 2-D TCN and its two baselines.

``proposed2d`` runs a stack of 2-D temporal blocks over a d x m seismic
patch and feeds the resulting features to two shallow 3-layer heads: a
regression head that collapses the width to the well trace and a
reconstruction head that rebuilds the input patch. ``tcn1d`` is the same
network restricted to the center trace (m = 1, kw = 1). ``lstm`` is a
one-layer unidirectional LSTM over the center trace.
"""
from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import numpy as np

from inversion.autodiff.tensor import (
    Tensor,
    add,
    bias_add,
    matmul,
    mul,
    relu,
    reshape,
    select,
    sigmoid,
    stack,
    tanh,
)
from inversion.configs import ModelConfig, parse_config
from inversion.errors import ShapeError
from inversion.nn.layers import (
    Conv2DParams,
    TemporalBlock2DParams,
    conv2d,
    he_init,
    make_conv,
    make_temporal_block,
    temporal_block_2d,
)

logger = logging.getLogger(__name__)

INPUT_CHANNELS = 1
LSTM_GATES = ('i', 'f', 'g', 'o')


######################################################################
# PARAMETERS
######################################################################
@dataclass
class LSTMParams:
    """One-layer LSTM with a per-step linear read-out.

    ``input_weights[k]`` is 1 x H, ``recurrent_weights[k]`` is H x H and
    ``biases[k]`` is H for each gate k in ``LSTM_GATES``.
    """
    input_weights: Dict[str, Tensor]
    recurrent_weights: Dict[str, Tensor]
    biases: Dict[str, Tensor]
    proj_weight: Tensor
    proj_bias: Tensor

    @property
    def hidden_size(self) -> int:
        """Hidden state width H."""
        return self.proj_weight.shape[0]


@dataclass
class ModelParams:
    """All trainable tensors of one network."""
    variant: str
    features: List[TemporalBlock2DParams] = field(default_factory=list)
    regression: List[Conv2DParams] = field(default_factory=list)
    reconstruction: List[Conv2DParams] = field(default_factory=list)
    lstm: Optional[LSTMParams] = None

    def named_tensors(self) -> List[Tuple[str, Tensor]]:
        """Every trainable tensor with a stable dotted name, in build order."""
        named: List[Tuple[str, Tensor]] = []

        def add_conv(prefix: str, conv: Conv2DParams) -> None:
            named.append((f"{prefix}.weight", conv.weight))
            named.append((f"{prefix}.bias", conv.bias))

        for index, block in enumerate(self.features):
            add_conv(f"features.{index}.conv1", block.conv1)
            add_conv(f"features.{index}.conv2", block.conv2)
            if block.downsample is not None:
                add_conv(f"features.{index}.downsample", block.downsample)
        for index, conv in enumerate(self.regression):
            add_conv(f"regression.{index}", conv)
        for index, conv in enumerate(self.reconstruction):
            add_conv(f"reconstruction.{index}", conv)
        if self.lstm is not None:
            for gate in LSTM_GATES:
                named.append((f"lstm.w_{gate}", self.lstm.input_weights[gate]))
                named.append((f"lstm.u_{gate}", self.lstm.recurrent_weights[gate]))
                named.append((f"lstm.b_{gate}", self.lstm.biases[gate]))
            named.append(('lstm.proj.weight', self.lstm.proj_weight))
            named.append(('lstm.proj.bias', self.lstm.proj_bias))
        return named

    def tensors(self) -> List[Tensor]:
        """Trainable tensors in ``named_tensors`` order."""
        return [tensor for _, tensor in self.named_tensors()]

    def parameter_count(self) -> int:
        """Total number of scalar parameters."""
        return sum(tensor.size for tensor in self.tensors())

    def checksum(self) -> str:
        """SHA-256 over names, shapes and raw values."""
        digest = hashlib.sha256()
        for name, tensor in self.named_tensors():
            digest.update(name.encode('utf-8'))
            digest.update(str(tensor.shape).encode('utf-8'))
            digest.update(np.ascontiguousarray(tensor.data).tobytes())
        return digest.hexdigest()

    def zero_grad(self) -> None:
        """Clears gradients on every tensor."""
        for tensor in self.tensors():
            tensor.zero_grad()


@dataclass
class Network:
    """A configuration paired with its parameters."""
    config: ModelConfig
    params: ModelParams

    def forward(
            self,
            patches: Tensor,
            training: bool = False,
            rng: Optional[np.random.Generator] = None
    ) -> Tuple[Tensor, Optional[Tensor]]:
        """See :func:`model_forward`."""
        return model_forward(self.params, self.config, patches, training, rng)


######################################################################
# BUILD
######################################################################
def _collapse_kernel_width(config: ModelConfig) -> int:
    """Width of the regression head's last kernel.

    With kw > 1 the last layer spans the full patch; with kw == 1 the center
    feature column is selected instead so no layer mixes columns.
    """
    return config.patch_width if config.kernel[1] > 1 else 1


def _build_lstm(config: ModelConfig, rng: np.random.Generator) -> LSTMParams:
    hidden = config.lstm_hidden
    input_weights, recurrent_weights, biases = {}, {}, {}
    for gate in LSTM_GATES:
        input_weights[gate] = he_init((INPUT_CHANNELS, hidden), INPUT_CHANNELS, rng)
        recurrent_weights[gate] = he_init((hidden, hidden), hidden, rng)
        biases[gate] = Tensor(np.zeros(hidden, dtype=np.float32), requires_grad=True)
    return LSTMParams(
        input_weights=input_weights,
        recurrent_weights=recurrent_weights,
        biases=biases,
        proj_weight=he_init((hidden, 1), hidden, rng),
        proj_bias=Tensor(np.zeros(1, dtype=np.float32), requires_grad=True),
    )


def build_model(
        config: Union[ModelConfig, Mapping[str, Any]],
        rng: np.random.Generator
) -> ModelParams:
    """He-initializes every parameter of the configured variant.

    Args:
        config: A ModelConfig, or a mapping validated into one.
        rng: Source of the initial weights.

    Returns:
        ModelParams: Deterministic given the config and rng state.

    Raises:
        ConfigError: If the configuration is invalid (names the field).
    """
    if not isinstance(config, ModelConfig):
        config = parse_config(ModelConfig, config)

    if config.variant == 'lstm':
        params = ModelParams(variant='lstm', lstm=_build_lstm(config, rng))
    else:
        kernel = tuple(config.kernel)
        features = []
        in_ch = INPUT_CHANNELS
        for out_ch, dilation in zip(config.block_channels, config.dilations):
            features.append(make_temporal_block(
                in_ch, out_ch, kernel, dilation, rng,
                dropout_p=config.dropout_p, causal=config.causal
            ))
            in_ch = out_ch
        head_kernel = (config.head_kernel_height, config.kernel[1])
        hidden_a, hidden_b = config.head_channels
        regression = [
            make_conv(in_ch, hidden_a, head_kernel, rng, causal=config.causal),
            make_conv(hidden_a, hidden_b, head_kernel, rng, causal=config.causal),
            make_conv(hidden_b, 1, (1, _collapse_kernel_width(config)), rng,
                      padding=(0, 0)),
        ]
        reconstruction = [
            make_conv(in_ch, hidden_a, head_kernel, rng, causal=config.causal),
            make_conv(hidden_a, hidden_b, head_kernel, rng, causal=config.causal),
            make_conv(hidden_b, 1, head_kernel, rng, causal=config.causal),
        ]
        params = ModelParams(
            variant=config.variant,
            features=features,
            regression=regression,
            reconstruction=reconstruction,
        )
    logger.debug("Built %s with %d parameters", config.variant, params.parameter_count())
    return params


def transfer_weights(source: ModelParams, target: ModelParams) -> None:
    """Copies every tensor of ``source`` into the same-named tensor of ``target``.

    Raises:
        ShapeError: If a name is missing from ``target`` or shapes differ.
    """
    destination = dict(target.named_tensors())
    for name, tensor in source.named_tensors():
        if name not in destination:
            raise ShapeError(f"target has no tensor named '{name}'")
        if destination[name].shape != tensor.shape:
            raise ShapeError(
                f"tensor '{name}' shape mismatch: {tensor.shape} vs {destination[name].shape}"
            )
        destination[name].data = tensor.data.astype(destination[name].dtype, copy=True)


######################################################################
# FORWARD
######################################################################
def lstm_forward(params: ModelParams, trace_batch: Tensor) -> Tensor:
    """Runs the LSTM over depth and projects each hidden state to one value.

    Args:
        params: Parameters of an ``lstm`` variant.
        trace_batch: Tensor[B x d x 1], the center traces.

    Returns:
        Tensor[B x d].

    Raises:
        ShapeError: If the input is not B x d x 1.
    """
    lstm = params.lstm
    if lstm is None:
        raise ShapeError('lstm_forward needs parameters of the lstm variant')
    if trace_batch.ndim != 3 or trace_batch.shape[2] != INPUT_CHANNELS:
        raise ShapeError(f"lstm_forward expects B x d x 1 input, got {trace_batch.shape}")
    batch, depth, _ = trace_batch.shape
    dtype = lstm.proj_weight.dtype
    hidden = Tensor(np.zeros((batch, lstm.hidden_size), dtype=dtype))
    cell = Tensor(np.zeros((batch, lstm.hidden_size), dtype=dtype))

    def gate(x_t: Tensor, state: Tensor, name: str) -> Tensor:
        pre = add(matmul(x_t, lstm.input_weights[name]),
                  matmul(state, lstm.recurrent_weights[name]))
        return bias_add(pre, lstm.biases[name])

    outputs = []
    for step in range(depth):
        x_t = select(trace_batch, step, axis=1)
        i_t = sigmoid(gate(x_t, hidden, 'i'))
        f_t = sigmoid(gate(x_t, hidden, 'f'))
        g_t = tanh(gate(x_t, hidden, 'g'))
        o_t = sigmoid(gate(x_t, hidden, 'o'))
        cell = add(mul(f_t, cell), mul(i_t, g_t))
        hidden = mul(o_t, tanh(cell))
        outputs.append(bias_add(matmul(hidden, lstm.proj_weight), lstm.proj_bias))
    return reshape(stack(outputs, axis=1), (batch, depth))


def model_forward(
        params: ModelParams,
        config: ModelConfig,
        patch_batch: Tensor,
        training: bool = False,
        rng: Optional[np.random.Generator] = None
) -> Tuple[Tensor, Optional[Tensor]]:
    """Estimates the well trace and reconstructs the input patch.

    Args:
        params: Network parameters.
        config: The configuration the parameters were built from.
        patch_batch: Tensor[B x 1 x d x m].
        training: Enables dropout (requires ``rng``).
        rng: Dropout randomness.

    Returns:
        (y_hat, x_hat): y_hat is B x d; x_hat is B x 1 x d x m, or None for
        the LSTM, which has no reconstruction head.

    Raises:
        ShapeError: If the patch does not match (d, m) of the config.
    """
    expected = (INPUT_CHANNELS, config.depth, config.patch_width)
    if patch_batch.ndim != 4 or tuple(patch_batch.shape[1:]) != expected:
        raise ShapeError(
            f"patch batch shape {patch_batch.shape} does not match "
            f"B x {expected[0]} x {expected[1]} x {expected[2]}"
        )
    batch = patch_batch.shape[0]

    if config.variant == 'lstm':
        traces = reshape(patch_batch, (batch, config.depth, 1))
        return lstm_forward(params, traces), None

    features = patch_batch
    for block in params.features:
        features = temporal_block_2d(features, block, training, rng)

    regressed = relu(conv2d(features, params.regression[0]))
    regressed = relu(conv2d(regressed, params.regression[1]))
    if params.regression[2].kernel[1] == 1 and config.patch_width > 1:
        center = select(regressed, config.patch_width // 2, axis=3)
        regressed = reshape(center, center.shape + (1,))
    y_hat = reshape(conv2d(regressed, params.regression[2]), (batch, config.depth))

    rebuilt = relu(conv2d(features, params.reconstruction[0]))
    rebuilt = relu(conv2d(rebuilt, params.reconstruction[1]))
    x_hat = conv2d(rebuilt, params.reconstruction[2])
    return y_hat, x_hat
