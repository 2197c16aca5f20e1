"""
Schemas for the inversion toolkit.

Report and result records that cross a file or process boundary are
validated pydantic models; they are stored in this module.
"""
from __future__ import annotations

import math
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

MIN_LENGTH = 1


######################################################################
# VALIDATION METHODS
######################################################################
def check_not_whitespace_only(
        value: str
) -> str:
    """Ensure the string is not composed solely of whitespace.

    Args:
        value (str): The string to check.

    Returns:
        str: The original string if it is not composed solely of whitespace.

    Raises:
        ValueError: If the string consists only of whitespace characters.
    """
    if isinstance(value, str):
        if not value or value.isspace():
            raise ValueError(
                'Field cannot consist only of whitespace.'
            )
    return value


######################################################################
# SCHEMAS
######################################################################
class GradCheckReport(BaseModel):
    """Outcome of one finite-difference gradient check.

    Attributes:
        name (str): What was checked (op name and case).
        max_rel_error (float): Largest relative error over checked elements.
        tol (float): Threshold the error is compared against.
        checked (int): Number of input elements perturbed.
        passed (bool): Whether ``max_rel_error < tol``.
    """
    name: str = Field(..., min_length=MIN_LENGTH, examples=['conv2d'])
    max_rel_error: float = Field(..., ge=0)
    tol: float = Field(..., gt=0)
    checked: int = Field(..., ge=0)
    passed: bool

    @field_validator('name')
    # pylint: disable=no-self-argument
    def check_name_not_whitespace_only(
            cls,
            value: str
    ) -> str:
        """Validates that the name is not composed solely of whitespace."""
        return check_not_whitespace_only(value)


class Metrics(BaseModel):
    """Per-trace PCC and r² over a section, with their arithmetic means.

    Columns whose statistics are undefined (constant truth or prediction)
    are left out of the lists and counted in ``excluded``.

    Attributes:
        columns (List[int]): Section column of each entry.
        pcc (List[float]): Pearson correlation per column, in [-1, 1].
        r2 (List[float]): Coefficient of determination per column, <= 1.
        avg_pcc (float): Mean of ``pcc``.
        avg_r2 (float): Mean of ``r2``.
        excluded (int): Columns skipped because a statistic was undefined.
    """
    columns: List[int] = Field(default_factory=list)
    pcc: List[float] = Field(default_factory=list)
    r2: List[float] = Field(default_factory=list)
    avg_pcc: float = float('nan')
    avg_r2: float = float('nan')
    excluded: int = Field(0, ge=0)

    @field_validator('pcc')
    # pylint: disable=no-self-argument
    def check_pcc_range(
            cls,
            value: List[float]
    ) -> List[float]:
        """PCC values must lie in [-1, 1]."""
        if any(not -1.0 <= v <= 1.0 for v in value):
            raise ValueError('PCC values must lie in [-1, 1].')
        return value

    @field_validator('r2')
    # pylint: disable=no-self-argument
    def check_r2_bound(
            cls,
            value: List[float]
    ) -> List[float]:
        """r² values can never exceed 1."""
        if any(v > 1.0 for v in value):
            raise ValueError('r2 values must be <= 1.')
        return value

    @model_validator(mode='after')
    def check_lengths(self) -> 'Metrics':
        """All per-trace lists describe the same columns."""
        if not len(self.columns) == len(self.pcc) == len(self.r2):
            raise ValueError('columns, pcc and r2 must have equal lengths.')
        return self

    @property
    def n_traces(self) -> int:
        """Number of columns with defined metrics."""
        return len(self.columns)


class TraceMetricDTO(BaseModel):
    """One column's entry in ``report.json``."""
    col: int = Field(..., ge=0)
    pcc: float
    r2: float


class HeldOutDTO(BaseModel):
    """Averages restricted to columns that were not training wells."""
    avg_pcc: Optional[float] = None
    avg_r2: Optional[float] = None
    n_traces: int = Field(0, ge=0)
    excluded_traces: int = Field(0, ge=0)


class MetricsReportDTO(BaseModel):
    """The stable ``report.json`` document written by ``eval``.

    Attributes:
        variant (str): Network variant that produced the predictions.
        avg_pcc (float): Mean PCC over all usable columns.
        avg_r2 (float): Mean r² over all usable columns.
        n_traces (int): Columns that contributed to the averages.
        excluded_traces (int): Columns left out as degenerate.
        per_trace (List[TraceMetricDTO]): Column-level values.
        held_out (HeldOutDTO): The same averages over non-well columns.
    """
    variant: str = Field(..., min_length=MIN_LENGTH, examples=['proposed2d'])
    avg_pcc: Optional[float]
    avg_r2: Optional[float]
    n_traces: int = Field(..., ge=0)
    excluded_traces: int = Field(..., ge=0)
    per_trace: List[TraceMetricDTO] = Field(default_factory=list)
    held_out: HeldOutDTO = Field(default_factory=HeldOutDTO)

    @field_validator('variant', mode='before')
    # pylint: disable=no-self-argument
    def check_variant_not_whitespace_only(
            cls,
            value: str
    ) -> str:
        """Validates that the variant is not composed solely of whitespace."""
        return check_not_whitespace_only(value)

    @classmethod
    def from_metrics(
            cls,
            variant: str,
            metrics: Metrics,
            held_out: Optional[Metrics] = None
    ) -> 'MetricsReportDTO':
        """Builds the report from section-wide and held-out metrics."""
        held = HeldOutDTO()
        if held_out is not None:
            held = HeldOutDTO(
                avg_pcc=_finite_or_none(held_out.avg_pcc),
                avg_r2=_finite_or_none(held_out.avg_r2),
                n_traces=held_out.n_traces,
                excluded_traces=held_out.excluded,
            )
        return cls(
            variant=variant,
            avg_pcc=_finite_or_none(metrics.avg_pcc),
            avg_r2=_finite_or_none(metrics.avg_r2),
            n_traces=metrics.n_traces,
            excluded_traces=metrics.excluded,
            per_trace=[
                TraceMetricDTO(col=c, pcc=p, r2=r)
                for c, p, r in zip(metrics.columns, metrics.pcc, metrics.r2)
            ],
            held_out=held,
        )


def _finite_or_none(value: float) -> Optional[float]:
    return None if math.isnan(value) else float(value)
