"""
Package: nn.

Convolutional building blocks of the temporal convolutional networks.
"""
from __future__ import annotations

from inversion.nn.layers import (
    Conv2DParams,
    TemporalBlock2DParams,
    conv2d,
    dropout,
    he_init,
    make_conv,
    make_temporal_block,
    receptive_field,
    same_padding,
    temporal_block_2d,
)
