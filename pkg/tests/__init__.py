"""
Package: tests
Package for the toolkit tests.
"""
import math
import pathlib
import struct
from typing import Dict, Sequence

import numpy as np

from inversion.configs import ModelConfig, SynthConfig, TrainConfig
from inversion.geodata.grid import GridKind, SectionGrid

# Find the project root directory (where pyproject.toml is located)
PROJECT_ROOT = pathlib.Path(__file__).parent.parent

TEST_SEED = 1337
TEST_DEPTH = 16

TINY_TCN1D: Dict = dict(
    variant='tcn1d', depth=TEST_DEPTH, block_channels=[4, 6],
    dilations=[1, 2], head_channels=[6, 4], dropout_p=0.0,
)
TINY_PROPOSED2D: Dict = dict(
    variant='proposed2d', patch_width=3, depth=TEST_DEPTH,
    block_channels=[4, 120], dilations=[1, 2], head_channels=[6, 4],
    dropout_p=0.0,
)
TINY_LSTM: Dict = dict(variant='lstm', depth=TEST_DEPTH, lstm_hidden=6)

SMALL_SYNTH: Dict = dict(
    d=TEST_DEPTH, n=24, dz=5.0, dx=125.0, layers_min=3, layers_max=5,
    undulation_amplitude_m=4.0, max_dip=0.002, well_spacing_m=500.0,
    snr_db=None, seed=TEST_SEED,
)


############################################################
# TEST HELPER FUNCTIONS
############################################################
def tiny_model_config(**overrides) -> ModelConfig:
    """A small tcn1d configuration, optionally overridden."""
    return ModelConfig(**{**TINY_TCN1D, **overrides})


def small_synth_config(**overrides) -> SynthConfig:
    """A desk-scale synthetic configuration small enough for unit tests."""
    return SynthConfig(**{**SMALL_SYNTH, **overrides})


def quick_train_config(**overrides) -> TrainConfig:
    """A few-epoch training protocol."""
    base = dict(epochs=3, batch_size=2, log_every=1, seed=TEST_SEED)
    return TrainConfig(**{**base, **overrides})


def two_layer_section(d: int = 20, n: int = 5, interface: int = 10,
                      top: float = 2.0, bottom: float = 3.0) -> SectionGrid:
    """Impedance section with one horizontal interface at row ``interface``."""
    values = np.full((d, n), top)
    values[interface:] = bottom
    return SectionGrid(values, 5.0, 125.0, GridKind.IMPEDANCE)


def float_to_ibm(value: float) -> int:
    """Encodes a float as an IBM System/360 single-precision word."""
    if value == 0.0:
        return 0
    sign = 0x80000000 if value < 0 else 0
    magnitude = abs(value)
    exponent = 64
    while magnitude >= 1.0:
        magnitude /= 16.0
        exponent += 1
    while magnitude < 1.0 / 16.0:
        magnitude *= 16.0
        exponent -= 1
    fraction = int(round(magnitude * (1 << 24)))
    if fraction == 1 << 24:
        fraction >>= 4
        exponent += 1
    return sign | (exponent << 24) | fraction


def make_segy(
        traces: Sequence[Sequence[float]],
        format_code: int = 5,
        sample_interval_us: int = 4000,
        samples_per_trace: int = None,
) -> bytes:
    """Builds a minimal big-endian SEG-Y file."""
    ns = len(traces[0]) if samples_per_trace is None else samples_per_trace
    text = b' ' * 3200
    binary = bytearray(400)
    struct.pack_into('>H', binary, 16, sample_interval_us)
    struct.pack_into('>H', binary, 20, ns)
    struct.pack_into('>H', binary, 24, format_code)
    body = b''
    for index, samples in enumerate(traces):
        header = bytearray(240)
        struct.pack_into('>i', header, 0, index + 1)
        struct.pack_into('>i', header, 20, 100 + index)
        if format_code == 1:
            payload = struct.pack(f">{len(samples)}I", *[float_to_ibm(s) for s in samples])
        else:
            payload = struct.pack(f">{len(samples)}f", *samples)
        body += bytes(header) + payload
    return text + bytes(binary) + body


def brute_force_pcc(a: Sequence[float], b: Sequence[float]) -> float:
    """Pearson correlation with plain Python loops."""
    n = len(a)
    mean_a = sum(a) / n
    mean_b = sum(b) / n
    cov = sum((x - mean_a) * (y - mean_b) for x, y in zip(a, b)) / n
    var_a = sum((x - mean_a) ** 2 for x in a) / n
    var_b = sum((y - mean_b) ** 2 for y in b) / n
    return cov / math.sqrt(var_a * var_b)


def brute_force_r2(pred: Sequence[float], truth: Sequence[float]) -> float:
    """Coefficient of determination with plain Python loops."""
    mean_t = sum(truth) / len(truth)
    ss_res = sum((t - p) ** 2 for p, t in zip(pred, truth))
    ss_tot = sum((t - mean_t) ** 2 for t in truth)
    return 1.0 - ss_res / ss_tot
