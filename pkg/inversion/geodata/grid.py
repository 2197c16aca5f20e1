"""
Section grids and the SGRD file format.

SGRD layout (little-endian): magic ``SGRD``, u32 version (1), u32 d,
u32 n, f32 dz, f32 dx, u8 kind code, then d*n f32 values, depth-major.
The low 7 bits of the kind code name the kind; bit 7 marks a time
(rather than depth) vertical axis.
"""
from __future__ import annotations

import enum
import logging
import pathlib
import struct
from dataclasses import dataclass
from typing import Union

import numpy as np

from inversion.errors import DomainError, GridFormatError, ShapeError

logger = logging.getLogger(__name__)

GRID_MAGIC = b'SGRD'
GRID_VERSION = 1
_HEADER = struct.Struct('<4sIIIffB')
_TIME_AXIS_FLAG = 0x80

PathLike = Union[str, pathlib.Path]


class GridKind(str, enum.Enum):
    """What a section's values represent."""
    IMPEDANCE = 'impedance'
    SEISMIC = 'seismic'
    DENSITY = 'density'
    VELOCITY = 'velocity'

    @property
    def code(self) -> int:
        """The SGRD kind code."""
        return list(GridKind).index(self)

    @classmethod
    def from_code(cls, code: int) -> 'GridKind':
        """Inverse of :attr:`code`."""
        kinds = list(cls)
        if not 0 <= code < len(kinds):
            raise GridFormatError(f"unknown SGRD kind code {code}")
        return kinds[code]


@dataclass
class SectionGrid:
    """A depth x trace section with its sampling.

    Attributes:
        values: d x n float32 matrix (row = depth sample, column = trace).
        dz: Vertical sample interval (m, or microseconds for time axes).
        dx: Trace spacing (m).
        kind: What the values are.
        time_axis: True when ``dz`` is a time interval.
    """
    values: np.ndarray
    dz: float
    dx: float
    kind: GridKind = GridKind.SEISMIC
    time_axis: bool = False

    def __post_init__(self) -> None:
        self.values = np.ascontiguousarray(self.values, dtype=np.float32)
        self.kind = GridKind(self.kind)
        if self.values.ndim != 2 or self.values.shape[0] < 2 or self.values.shape[1] < 1:
            raise ShapeError(
                f"{self.kind.value} grid must be d x n with d >= 2, n >= 1; "
                f"got {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise DomainError(f"{self.kind.value} grid contains non-finite values")
        if self.kind is GridKind.IMPEDANCE and np.any(self.values <= 0):
            raise DomainError('impedance grid must be strictly positive')

    @property
    def d(self) -> int:
        """Depth samples."""
        return self.values.shape[0]

    @property
    def n(self) -> int:
        """Trace columns."""
        return self.values.shape[1]

    @property
    def shape(self):
        """(d, n)."""
        return self.values.shape

    def column(self, index: int) -> np.ndarray:
        """One trace."""
        return self.values[:, index]


def encode_grid(grid: SectionGrid) -> bytes:
    """Serializes a grid to SGRD bytes."""
    code = grid.kind.code | (_TIME_AXIS_FLAG if grid.time_axis else 0)
    header = _HEADER.pack(GRID_MAGIC, GRID_VERSION, grid.d, grid.n,
                          grid.dz, grid.dx, code)
    return header + grid.values.astype('<f4').tobytes()


def decode_grid(blob: bytes, source: str = '<bytes>') -> SectionGrid:
    """Parses SGRD bytes.

    Raises:
        GridFormatError: On bad magic, version, kind or payload length.
    """
    if len(blob) < _HEADER.size:
        raise GridFormatError(f"{source}: file too short for an SGRD header")
    magic, version, d, n, dz, dx, code = _HEADER.unpack_from(blob)
    if magic != GRID_MAGIC:
        raise GridFormatError(f"{source}: not an SGRD file (bad magic)")
    if version != GRID_VERSION:
        raise GridFormatError(f"{source}: unsupported SGRD version {version}")
    payload = blob[_HEADER.size:]
    if len(payload) != d * n * 4:
        raise GridFormatError(
            f"{source}: SGRD payload has {len(payload)} bytes, expected {d * n * 4}"
        )
    values = np.frombuffer(payload, dtype='<f4').reshape(d, n)
    return SectionGrid(
        values=values.astype(np.float32),
        dz=float(dz),
        dx=float(dx),
        kind=GridKind.from_code(code & ~_TIME_AXIS_FLAG),
        time_axis=bool(code & _TIME_AXIS_FLAG),
    )


def write_grid(path: PathLike, grid: SectionGrid) -> None:
    """Writes an SGRD file."""
    pathlib.Path(path).write_bytes(encode_grid(grid))
    logger.info("Wrote %s grid %d x %d to %s", grid.kind.value, grid.d, grid.n, path)


def read_grid(path: PathLike) -> SectionGrid:
    """Reads an SGRD file."""
    path = pathlib.Path(path)
    if not path.is_file():
        raise GridFormatError(f"grid file not found: {path}")
    return decode_grid(path.read_bytes(), source=str(path))
