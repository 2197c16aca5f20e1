"""
TNSR tensor files.

Layout: magic ``TNSR``, u8 rank, rank x u32 little-endian dims, then the
float32 little-endian row-major payload.
"""
from __future__ import annotations

import logging
import pathlib
import struct
from typing import Union

import numpy as np

from inversion.autodiff.tensor import Tensor
from inversion.errors import ChecksumError, TensorFormatError

logger = logging.getLogger(__name__)

TENSOR_MAGIC = b'TNSR'
PathLike = Union[str, pathlib.Path]


def encode_tensor(values: Union[Tensor, np.ndarray]) -> bytes:
    """Serializes an array (any float dtype, stored as f32) to TNSR bytes."""
    array = values.data if isinstance(values, Tensor) else np.asarray(values)
    if array.ndim > 255:
        raise TensorFormatError(f"TNSR rank is limited to 255, got {array.ndim}")
    header = TENSOR_MAGIC + struct.pack('<B', array.ndim)
    header += struct.pack(f"<{array.ndim}I", *array.shape)
    payload = np.ascontiguousarray(array, dtype='<f4').tobytes()
    return header + payload


def decode_tensor(blob: bytes, source: str = '<bytes>') -> np.ndarray:
    """Parses TNSR bytes into a float32 array.

    Raises:
        TensorFormatError: If the magic or header is malformed.
        ChecksumError: If the payload is shorter or longer than declared.
    """
    if len(blob) < 5 or blob[:4] != TENSOR_MAGIC:
        raise TensorFormatError(f"{source}: not a TNSR file (bad magic)")
    rank = blob[4]
    header_len = 5 + 4 * rank
    if len(blob) < header_len:
        raise ChecksumError(f"{source}: truncated TNSR header")
    shape = struct.unpack(f"<{rank}I", blob[5:header_len])
    expected = int(np.prod(shape, dtype=np.int64)) * 4
    payload = blob[header_len:]
    if len(payload) != expected:
        raise ChecksumError(
            f"{source}: TNSR payload has {len(payload)} bytes, expected {expected}"
        )
    return np.frombuffer(payload, dtype='<f4').reshape(shape).astype(np.float32)


def write_tensor(path: PathLike, values: Union[Tensor, np.ndarray]) -> int:
    """Writes a TNSR file and returns the number of bytes written."""
    blob = encode_tensor(values)
    pathlib.Path(path).write_bytes(blob)
    logger.debug("Wrote tensor %s (%d bytes)", path, len(blob))
    return len(blob)


def read_tensor(path: PathLike, requires_grad: bool = False) -> Tensor:
    """Reads a TNSR file into a float32 Tensor."""
    blob = pathlib.Path(path).read_bytes()
    return Tensor(decode_tensor(blob, source=str(path)), requires_grad=requires_grad)
