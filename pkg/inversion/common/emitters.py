"""
File emitters: 8-bit PGM images, CSV tables and JSON documents.
"""
from __future__ import annotations

import csv
import logging
import pathlib
from typing import Iterable, List, Sequence, Union

import numpy as np
from pydantic import BaseModel

logger = logging.getLogger(__name__)

PathLike = Union[str, pathlib.Path]


def to_gray(values: np.ndarray) -> np.ndarray:
    """Min-max scales a matrix to uint8; a constant matrix maps to 0."""
    values = np.asarray(values, dtype=np.float64)
    low, high = float(values.min()), float(values.max())
    if high == low:
        return np.zeros(values.shape, dtype=np.uint8)
    scaled = np.rint((values - low) / (high - low) * 255.0)
    return scaled.astype(np.uint8)


def write_pgm(path: PathLike, values: np.ndarray) -> None:
    """Writes a binary (P5) PGM, one pixel per matrix entry, rows top-down."""
    gray = to_gray(values)
    height, width = gray.shape
    header = f"P5\n{width} {height}\n255\n".encode('ascii')
    pathlib.Path(path).write_bytes(header + gray.tobytes())
    logger.info("Wrote %d x %d image to %s", height, width, path)


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Writes a header line followed by ``rows``."""
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)
    logger.info("Wrote table %s", path)


def read_csv(path: PathLike) -> List[dict]:
    """Reads a headed CSV file into dict rows."""
    with open(path, newline='', encoding='utf-8') as handle:
        return list(csv.DictReader(handle))


def write_json(path: PathLike, document: BaseModel) -> None:
    """Writes a pydantic model as indented JSON."""
    pathlib.Path(path).write_text(document.model_dump_json(indent=2) + '\n',
                                  encoding='utf-8')
    logger.info("Wrote %s", path)
