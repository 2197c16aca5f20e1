"""
Dilated 2-D convolution and the 2-D temporal block.

Layers are pure functions of ``(input, params, rng)``. Convolutions are
cross-correlations with stride 1; dilation applies along depth (axis H)
and "same" padding keeps H and W unchanged. With ``causal`` padding the
depth padding is placed entirely above the first row, so output row t sees
only input rows <= t.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from inversion.autodiff.tensor import Tensor, add, mul, pad, relu, record_op
from inversion.errors import ConfigError, ShapeError

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]


######################################################################
# PARAMETERS
######################################################################
@dataclass
class Conv2DParams:
    """Weights of one convolution.

    Attributes:
        weight: Tensor[out_ch x in_ch x kh x kw].
        bias: Tensor[out_ch].
        dilation: (dh, dw), both >= 1.
        padding: (ph, pw) zero padding per side.
        causal: Put 2*ph rows of padding above the input and none below.
    """
    weight: Tensor
    bias: Tensor
    dilation: Pair = (1, 1)
    padding: Pair = (0, 0)
    causal: bool = False

    @property
    def in_channels(self) -> int:
        """Input channel count."""
        return self.weight.shape[1]

    @property
    def out_channels(self) -> int:
        """Output channel count."""
        return self.weight.shape[0]

    @property
    def kernel(self) -> Pair:
        """Kernel (height, width)."""
        return self.weight.shape[2], self.weight.shape[3]

    def tensors(self) -> Tuple[Tensor, Tensor]:
        """Trainable tensors in a fixed order."""
        return self.weight, self.bias


@dataclass
class TemporalBlock2DParams:
    """Two dilated "same" convolutions with a residual connection.

    Attributes:
        conv1: in_ch -> out_ch.
        conv2: out_ch -> out_ch.
        downsample: 1x1 projection, present iff in_ch != out_ch.
        dropout_p: Dropout after the inner ReLU while training.
    """
    conv1: Conv2DParams
    conv2: Conv2DParams
    downsample: Optional[Conv2DParams] = None
    dropout_p: float = 0.0

    @property
    def in_channels(self) -> int:
        """Block input channel count."""
        return self.conv1.in_channels

    @property
    def out_channels(self) -> int:
        """Block output channel count."""
        return self.conv2.out_channels


######################################################################
# INITIALIZATION
######################################################################
def he_init(
        shape: Sequence[int],
        fan_in: int,
        rng: np.random.Generator
) -> Tensor:
    """Samples normal(0, sqrt(2 / fan_in)) as a trainable float32 tensor."""
    if fan_in < 1:
        raise ConfigError(f"he_init fan_in must be >= 1, got {fan_in}")
    values = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=tuple(shape))
    return Tensor(values.astype(np.float32), requires_grad=True)


def same_padding(kernel: Pair, dilation: Pair) -> Pair:
    """Padding that preserves H and W: 2*p == d*(k-1) per axis."""
    for size in kernel:
        if size % 2 == 0:
            raise ConfigError(f"'same' padding needs odd kernel sizes, got {kernel}")
    return (dilation[0] * (kernel[0] - 1) // 2, dilation[1] * (kernel[1] - 1) // 2)


def make_conv(
        in_ch: int,
        out_ch: int,
        kernel: Pair,
        rng: np.random.Generator,
        dilation: Pair = (1, 1),
        padding: Optional[Pair] = None,
        causal: bool = False,
) -> Conv2DParams:
    """He-initialized convolution; ``padding=None`` means "same"."""
    if padding is None:
        padding = same_padding(kernel, dilation)
    weight = he_init((out_ch, in_ch, kernel[0], kernel[1]),
                     in_ch * kernel[0] * kernel[1], rng)
    bias = Tensor(np.zeros(out_ch, dtype=np.float32), requires_grad=True)
    return Conv2DParams(weight, bias, tuple(dilation), tuple(padding), causal)


def make_temporal_block(
        in_ch: int,
        out_ch: int,
        kernel: Pair,
        dilation: int,
        rng: np.random.Generator,
        dropout_p: float = 0.0,
        causal: bool = False,
) -> TemporalBlock2DParams:
    """Builds a temporal block dilated along depth only (dw = 1)."""
    dil = (dilation, 1)
    conv1 = make_conv(in_ch, out_ch, kernel, rng, dil, causal=causal)
    conv2 = make_conv(out_ch, out_ch, kernel, rng, dil, causal=causal)
    downsample = None
    if in_ch != out_ch:
        downsample = make_conv(in_ch, out_ch, (1, 1), rng)
    return TemporalBlock2DParams(conv1, conv2, downsample, dropout_p)


######################################################################
# OPS
######################################################################
def _conv2d_valid(
        x: Tensor,
        weight: Tensor,
        bias: Tensor,
        dilation: Pair
) -> Tensor:
    """Unpadded dilated cross-correlation as a single im2col matrix product."""
    xd, wd, bd = x.data, weight.data, bias.data
    batch, channels, height, width = xd.shape
    out_ch, _, kh, kw = wd.shape
    dh, dw = dilation
    out_h = height - dh * (kh - 1)
    out_w = width - dw * (kw - 1)

    # B x C x out_h x out_w x kh x kw, a strided view with no copy
    windows = sliding_window_view(
        xd, (dh * (kh - 1) + 1, dw * (kw - 1) + 1), axis=(2, 3)
    )[..., ::dh, ::dw]
    cols = windows.transpose(0, 2, 3, 1, 4, 5).reshape(
        batch * out_h * out_w, channels * kh * kw
    )
    wmat = wd.reshape(out_ch, channels * kh * kw)
    value = (cols @ wmat.T).reshape(batch, out_h, out_w, out_ch).transpose(0, 3, 1, 2)
    value = np.ascontiguousarray(value) + bd.reshape(1, out_ch, 1, 1)

    def backward_fn(grad):
        gmat = grad.transpose(0, 2, 3, 1).reshape(-1, out_ch)
        grad_w = (gmat.T @ cols).reshape(wd.shape).astype(wd.dtype, copy=False)
        gcols = (gmat @ wmat).reshape(batch, out_h, out_w, channels, kh, kw)
        gcols = gcols.transpose(0, 3, 4, 5, 1, 2)
        grad_x = np.zeros_like(xd)
        # scatter each tap back onto its shifted window
        for i in range(kh):
            for j in range(kw):
                grad_x[:, :, i * dh:i * dh + out_h, j * dw:j * dw + out_w] += gcols[:, :, i, j]
        return grad_x, grad_w, grad.sum(axis=(0, 2, 3))

    return record_op('conv2d', value, (x, weight, bias), backward_fn)


def conv2d(x: Tensor, params: Conv2DParams) -> Tensor:
    """Zero-padded dilated cross-correlation, stride 1.

    Raises:
        ShapeError: If the input is not 4-D or channels differ.
        ConfigError: If an output dimension would be < 1.
    """
    if x.ndim != 4:
        raise ShapeError(f"conv2d expects B x C x H x W input, got {x.shape}")
    if x.shape[1] != params.in_channels:
        raise ShapeError(
            f"conv2d channel mismatch: input {x.shape} vs weight {params.weight.shape}"
        )
    (kh, kw), (dh, dw), (ph, pw) = params.kernel, params.dilation, params.padding
    out_h = x.shape[2] + 2 * ph - dh * (kh - 1)
    out_w = x.shape[3] + 2 * pw - dw * (kw - 1)
    if out_h < 1 or out_w < 1:
        raise ConfigError(
            f"conv2d output size {out_h} x {out_w} < 1 for input {x.shape}, "
            f"kernel {params.kernel}, dilation {params.dilation}, padding {params.padding}"
        )
    depth_pad = (2 * ph, 0) if params.causal else (ph, ph)
    if depth_pad != (0, 0) or pw:
        x = pad(x, ((0, 0), (0, 0), depth_pad, (pw, pw)))
    return _conv2d_valid(x, params.weight, params.bias, params.dilation)


def dropout(
        x: Tensor,
        p: float,
        training: bool,
        rng: Optional[np.random.Generator]
) -> Tensor:
    """Inverted dropout; the identity when not training or when p == 0.

    A uniform draw of ``x``'s shape is consumed whenever ``training`` is
    true and an rng is given, regardless of ``p``.
    """
    if not training or rng is None:
        return x
    draws = rng.random(x.shape)
    if p <= 0.0:
        return x
    mask = (draws >= p).astype(x.dtype) / x.dtype.type(1.0 - p)
    return mul(x, Tensor(mask))


def temporal_block_2d(
        x: Tensor,
        params: TemporalBlock2DParams,
        training: bool = False,
        rng: Optional[np.random.Generator] = None
) -> Tensor:
    """ReLU(conv2(ReLU(conv1(x))) + proj(x)), dropout after the inner ReLU."""
    hidden = dropout(relu(conv2d(x, params.conv1)), params.dropout_p, training, rng)
    hidden = conv2d(hidden, params.conv2)
    residual = x if params.downsample is None else conv2d(x, params.downsample)
    if residual.shape != hidden.shape:
        raise ShapeError(
            f"temporal block residual {residual.shape} does not match branch {hidden.shape}"
        )
    return relu(add(hidden, residual))


def receptive_field(dilations: Sequence[int], kh: int) -> int:
    """Depth span seen by one output sample of stacked temporal blocks."""
    return 1 + sum(2 * (kh - 1) * d for d in dilations)
