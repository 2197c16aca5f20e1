"""
Minimal SEG-Y Reader.

Handles fixed-length, big-endian SEG-Y (rev 0/1 subset) with IBM (format
code 1) or IEEE (format code 5) float samples and converts a 2-D line
into a section grid. Trace headers are kept opaque apart from the trace
sequence number and CDP fields; geometry is file order.
"""
from __future__ import annotations

import logging
import pathlib
import struct
from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np

from inversion.errors import (
    EmptyInputError,
    InconsistentTraceLengthError,
    SegyError,
    TruncatedFileError,
    UnsupportedFormatError,
    ZeroSamplesError,
)
from inversion.geodata.grid import GridKind, SectionGrid

logger = logging.getLogger(__name__)

TEXT_HEADER_SIZE = 3200
BINARY_HEADER_SIZE = 400
TRACE_HEADER_SIZE = 240
FILE_HEADER_SIZE = TEXT_HEADER_SIZE + BINARY_HEADER_SIZE

FORMAT_IBM = 1
FORMAT_IEEE = 5
SUPPORTED_FORMATS = (FORMAT_IBM, FORMAT_IEEE)

_SAMPLE_INTERVAL_OFFSET = 3216
_SAMPLES_OFFSET = 3220
_FORMAT_OFFSET = 3224


@dataclass(frozen=True)
class SegyBinaryHeader:
    """Decoded fields of the 400-byte binary file header."""
    sample_interval_us: int
    samples_per_trace: int
    format_code: int


@dataclass(frozen=True)
class SegyTrace:
    """One trace record.

    Attributes:
        header: The raw 240-byte trace header.
        sequence_number: Trace sequence number (bytes 1-4).
        cdp: CDP ensemble number (bytes 21-24).
        samples: Decoded float32 samples.
    """
    header: bytes
    sequence_number: int
    cdp: int
    samples: np.ndarray


@dataclass(frozen=True)
class SegyFile:
    """A parsed SEG-Y line."""
    textual_header: bytes
    binary_header: SegyBinaryHeader
    traces: List[SegyTrace]


######################################################################
# IBM FLOATS
######################################################################
def ibm_to_float(words: np.ndarray) -> np.ndarray:
    """Decodes IBM System/360 single-precision words to float32.

    Every bit pattern decodes; magnitudes beyond float32 range become inf.
    """
    words = np.asarray(words, dtype=np.uint32)
    sign = np.where(words >> 31, -1.0, 1.0)
    exponent = ((words >> 24) & 0x7F).astype(np.int64) - 64
    fraction = (words & 0x00FFFFFF).astype(np.float64) / float(1 << 24)
    with np.errstate(over='ignore'):
        value = sign * fraction * np.power(16.0, exponent.astype(np.float64))
        return value.astype(np.float32)


def ibm_to_f32(word: int) -> np.float32:
    """Decodes one IBM float word."""
    return ibm_to_float(np.array([word], dtype=np.uint32))[0]


######################################################################
# PARSING
######################################################################
def _u16(blob: bytes, offset: int) -> int:
    return struct.unpack_from('>H', blob, offset)[0]


def parse_binary_header(blob: bytes) -> SegyBinaryHeader:
    """Decodes the binary header fields this reader needs.

    Raises:
        TruncatedFileError: If ``blob`` is shorter than the file headers.
        UnsupportedFormatError: If the format code is not 1 or 5.
        ZeroSamplesError: If zero samples per trace are declared.
    """
    if len(blob) < FILE_HEADER_SIZE:
        raise TruncatedFileError(
            f"SEG-Y file has {len(blob)} bytes, fewer than the {FILE_HEADER_SIZE}-byte headers"
        )
    header = SegyBinaryHeader(
        sample_interval_us=_u16(blob, _SAMPLE_INTERVAL_OFFSET),
        samples_per_trace=_u16(blob, _SAMPLES_OFFSET),
        format_code=_u16(blob, _FORMAT_OFFSET),
    )
    if header.format_code not in SUPPORTED_FORMATS:
        raise UnsupportedFormatError(
            f"SEG-Y sample format code {header.format_code} is not supported "
            f"(expected one of {SUPPORTED_FORMATS})"
        )
    if header.samples_per_trace == 0:
        raise ZeroSamplesError('SEG-Y binary header declares zero samples per trace')
    return header


def _decode_samples(raw: bytes, format_code: int) -> np.ndarray:
    if format_code == FORMAT_IBM:
        return ibm_to_float(np.frombuffer(raw, dtype='>u4'))
    return np.frombuffer(raw, dtype='>f4').astype(np.float32)


def parse_segy(blob: bytes) -> SegyFile:
    """Parses a fixed-length SEG-Y byte string.

    Raises:
        TruncatedFileError: If the file ends inside a header or trace.
        UnsupportedFormatError: If the sample format is not 1 or 5.
        ZeroSamplesError: If zero samples per trace are declared.
    """
    binary = parse_binary_header(blob)
    record = TRACE_HEADER_SIZE + 4 * binary.samples_per_trace
    body = len(blob) - FILE_HEADER_SIZE
    if body % record:
        raise TruncatedFileError(
            f"SEG-Y trace data of {body} bytes is not a whole number of "
            f"{record}-byte trace records"
        )
    traces = []
    for offset in range(FILE_HEADER_SIZE, len(blob), record):
        header = blob[offset:offset + TRACE_HEADER_SIZE]
        sequence_number, = struct.unpack_from('>i', header, 0)
        cdp, = struct.unpack_from('>i', header, 20)
        samples = _decode_samples(blob[offset + TRACE_HEADER_SIZE:offset + record],
                                  binary.format_code)
        traces.append(SegyTrace(header, sequence_number, cdp, samples))
    logger.debug("Parsed %d SEG-Y traces of %d samples (format %d)",
                 len(traces), binary.samples_per_trace, binary.format_code)
    return SegyFile(blob[:TEXT_HEADER_SIZE], binary, traces)


def read_segy(path: Union[str, pathlib.Path]) -> SegyFile:
    """Reads and parses a SEG-Y file."""
    path = pathlib.Path(path)
    if not path.is_file():
        raise SegyError(f"SEG-Y file not found: {path}")
    logger.info("Reading SEG-Y file %s", path)
    return parse_segy(path.read_bytes())


def segy_to_grid(
        parsed: SegyFile,
        dx: float,
        dz: Optional[float] = None,
        kind: GridKind = GridKind.SEISMIC,
) -> SectionGrid:
    """Stacks traces as columns, in file order.

    Without ``dz`` the sample interval (microseconds) is recorded as-is
    and the grid is flagged as having a time axis.

    Raises:
        EmptyInputError: If there are no traces.
        InconsistentTraceLengthError: If trace lengths differ.
    """
    if not parsed.traces:
        raise EmptyInputError('SEG-Y file contains no traces')
    lengths = {len(trace.samples) for trace in parsed.traces}
    if len(lengths) != 1:
        raise InconsistentTraceLengthError(
            f"SEG-Y traces have differing sample counts {sorted(lengths)}"
        )
    values = np.stack([trace.samples for trace in parsed.traces], axis=1)
    if dz is None:
        return SectionGrid(values, float(parsed.binary_header.sample_interval_us),
                           dx, kind, time_axis=True)
    return SectionGrid(values, dz, dx, kind)
