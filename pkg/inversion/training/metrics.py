"""
Trace-wise evaluation metrics.

Metrics are computed in physical impedance units, column by column, in
ascending column order.
"""
from __future__ import annotations

import logging
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from inversion.errors import DegenerateError, ShapeError
from inversion.geodata.grid import SectionGrid
from inversion.schemas import Metrics

logger = logging.getLogger(__name__)

TRACE_TABLE_HEADER = ('column', 'depth', 'truth', 'prediction')


def _pair(a, b, name: str) -> Tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape or a.size < 2:
        raise ShapeError(
            f"{name} needs two vectors of equal length >= 2, got {a.size} and {b.size}"
        )
    return a, b


def pcc(a, b) -> float:
    """Pearson correlation, population convention.

    Raises:
        ShapeError: On unequal lengths or fewer than two samples.
        DegenerateError: If either vector is constant.
    """
    a, b = _pair(a, b, 'pcc')
    da = a - a.mean()
    db = b - b.mean()
    sa = np.sqrt(np.mean(da * da))
    sb = np.sqrt(np.mean(db * db))
    if sa == 0.0 or sb == 0.0:
        raise DegenerateError('pcc is undefined for a constant vector')
    return float(np.clip(np.mean(da * db) / (sa * sb), -1.0, 1.0))


def r2(pred, truth) -> float:
    """Coefficient of determination of ``pred`` against ``truth``.

    Raises:
        ShapeError: On unequal lengths or fewer than two samples.
        DegenerateError: If ``truth`` is constant.
    """
    pred, truth = _pair(pred, truth, 'r2')
    residual = truth - pred
    spread = truth - truth.mean()
    ss_tot = float(np.sum(spread * spread))
    if ss_tot == 0.0:
        raise DegenerateError('r2 is undefined for constant truth')
    return float(1.0 - np.sum(residual * residual) / ss_tot)


def evaluate_section(
        pred: SectionGrid,
        truth: SectionGrid,
        columns: Optional[Iterable[int]] = None
) -> Metrics:
    """Per-column PCC and r² with their means.

    Args:
        pred: Predicted section.
        truth: True section, same shape.
        columns: Restrict to these columns (default: all).

    Returns:
        Metrics: Degenerate columns are excluded and counted.

    Raises:
        ShapeError: If the sections differ in shape.
    """
    if pred.shape != truth.shape:
        raise ShapeError(f"prediction {pred.shape} and truth {truth.shape} differ")
    selected = range(truth.n) if columns is None else sorted(set(columns))
    kept: List[int] = []
    pccs: List[float] = []
    r2s: List[float] = []
    excluded = 0
    for col in selected:
        try:
            col_pcc = pcc(pred.values[:, col], truth.values[:, col])
            col_r2 = r2(pred.values[:, col], truth.values[:, col])
        except DegenerateError:
            excluded += 1
            continue
        kept.append(int(col))
        pccs.append(col_pcc)
        r2s.append(col_r2)
    if excluded:
        logger.warning("Excluded %d degenerate columns from metrics", excluded)
    return Metrics(
        columns=kept,
        pcc=pccs,
        r2=r2s,
        avg_pcc=float(np.mean(pccs)) if pccs else float('nan'),
        avg_r2=float(np.mean(r2s)) if r2s else float('nan'),
        excluded=excluded,
    )


def held_out_columns(n: int, wells: Sequence[int]) -> List[int]:
    """Columns that are not training wells."""
    training = set(int(w) for w in wells)
    return [col for col in range(n) if col not in training]


def trace_table(
        pred: SectionGrid,
        truth: Optional[SectionGrid],
        columns: Sequence[int]
) -> List[List[object]]:
    """Rows of (column, depth, truth, prediction) for pseudolog plots.

    ``truth`` may be None, leaving that field empty.

    Raises:
        ShapeError: If shapes differ or a column is out of range.
    """
    if truth is not None and truth.shape != pred.shape:
        raise ShapeError(f"prediction {pred.shape} and truth {truth.shape} differ")
    rows: List[List[object]] = []
    for col in columns:
        if not 0 <= col < pred.n:
            raise ShapeError(f"trace column {col} outside section of {pred.n} traces")
        for row in range(pred.d):
            rows.append([
                int(col),
                row * pred.dz,
                '' if truth is None else float(truth.values[row, col]),
                float(pred.values[row, col]),
            ])
    return rows