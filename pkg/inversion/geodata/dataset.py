"""
Well Sampling and Training-Set Assembly.

Training samples pair an m-wide seismic patch centered at a well with the
impedance log at that well. Patches replicate edge columns, identically
at train and predict time. Normalization statistics come from training
wells only.
"""
from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple, Union

import numpy as np

from inversion.errors import (
    ConfigError,
    DegenerateError,
    EmptyInputError,
    ShapeError,
    WellIndexError,
)
from inversion.geodata.grid import SectionGrid

logger = logging.getLogger(__name__)

GridOrArray = Union[SectionGrid, np.ndarray]


######################################################################
# WELLS AND PATCHES
######################################################################
def sample_wells(grid: SectionGrid, spacing_m: float) -> List[int]:
    """Uniformly spaced well columns starting at column 0.

    The step is ``round(spacing_m / dx)`` (halves round up).

    Raises:
        ConfigError: If ``spacing_m`` is smaller than the trace spacing.
    """
    if spacing_m < grid.dx:
        raise ConfigError(
            f"well spacing {spacing_m} m is smaller than trace spacing {grid.dx} m"
        )
    step = max(1, int(np.floor(spacing_m / grid.dx + 0.5)))
    return list(range(0, grid.n, step))


def _values(section: GridOrArray) -> np.ndarray:
    return section.values if isinstance(section, SectionGrid) else np.asarray(section)


def patch_columns(n: int, center: int, m: int) -> np.ndarray:
    """Column indices of an m-wide window, clamped to [0, n - 1]."""
    half = (m - 1) // 2
    return np.clip(np.arange(center - half, center + half + 1), 0, n - 1)


def extract_patch(seismic: GridOrArray, well_col: int, m: int = 7) -> np.ndarray:
    """Returns the 1 x d x m patch centered at ``well_col``.

    Raises:
        ConfigError: If ``m`` is not a positive odd number.
        WellIndexError: If ``well_col`` is outside the section.
    """
    if m < 1 or m % 2 == 0:
        raise ConfigError(f"patch width must be odd and positive, got {m}")
    values = _values(seismic)
    n = values.shape[1]
    if not 0 <= well_col < n:
        raise WellIndexError(f"well column {well_col} outside section of {n} traces")
    return values[:, patch_columns(n, well_col, m)][None, :, :]


######################################################################
# NORMALIZATION
######################################################################
@dataclass(frozen=True)
class Norm:
    """Affine z-score map."""
    mean: float
    std: float

    def apply(self, values: np.ndarray) -> np.ndarray:
        """(x - mean) / std."""
        return (np.asarray(values) - self.mean) / self.std

    def inverse(self, values: np.ndarray) -> np.ndarray:
        """x * std + mean."""
        return np.asarray(values) * self.std + self.mean


def normalize_fit(values: np.ndarray) -> Norm:
    """Fits mean and population std.

    Raises:
        EmptyInputError: If ``values`` is empty.
        DegenerateError: If the std is zero.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise EmptyInputError('cannot fit normalization on no values')
    mean = float(values.mean())
    std = float(values.std())
    if not std > 0:
        raise DegenerateError('cannot normalize values with zero variance')
    return Norm(mean, std)


def normalize_apply(values: np.ndarray, norm: Norm) -> np.ndarray:
    """Applies ``norm``."""
    return norm.apply(values)


######################################################################
# SAMPLES
######################################################################
@dataclass(frozen=True)
class TrainingSample:
    """Attributes:
        patch: 1 x d x m normalized seismic.
        target: d-vector of normalized impedance.
        well_column: Source column of the patch center.
    """
    patch: np.ndarray
    target: np.ndarray
    well_column: int


def hflip(sample: TrainingSample) -> TrainingSample:
    """Reverses patch columns; the center column and target are unchanged."""
    return TrainingSample(
        patch=np.ascontiguousarray(sample.patch[:, :, ::-1]),
        target=sample.target,
        well_column=sample.well_column,
    )


@dataclass
class WellDataset:
    """Normalized training samples plus the fitted norms."""
    samples: List[TrainingSample]
    seismic_norm: Norm
    impedance_norm: Norm
    patch_width: int
    wells: List[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def depth(self) -> int:
        """Samples per trace."""
        return self.samples[0].target.shape[0]

    def batch(
            self,
            indices: Sequence[int],
            flips: Sequence[bool]
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Stacks (B x 1 x d x m patches, B x d targets), flipping where asked."""
        chosen = [self.samples[i] for i in indices]
        chosen = [hflip(s) if flip else s for s, flip in zip(chosen, flips)]
        patches = np.stack([s.patch for s in chosen]).astype(np.float32)
        targets = np.stack([s.target for s in chosen]).astype(np.float32)
        return patches, targets

    def digest(self) -> str:
        """SHA-256 over norms, well columns and sample bytes."""
        sha = hashlib.sha256()
        sha.update(repr((self.seismic_norm, self.impedance_norm, self.patch_width)).encode())
        for sample in self.samples:
            sha.update(str(sample.well_column).encode())
            sha.update(np.ascontiguousarray(sample.patch, dtype='<f4').tobytes())
            sha.update(np.ascontiguousarray(sample.target, dtype='<f4').tobytes())
        return sha.hexdigest()


def build_dataset(
        ai: SectionGrid,
        seismic: SectionGrid,
        wells: Sequence[int],
        patch_width: int = 7
) -> WellDataset:
    """Extracts well patches and logs and normalizes them.

    Raises:
        ShapeError: If the sections differ in shape.
        EmptyInputError: If no wells are given.
        DegenerateError: If training seismic or logs have zero variance.
    """
    if ai.shape != seismic.shape:
        raise ShapeError(f"impedance {ai.shape} and seismic {seismic.shape} sections differ")
    if not wells:
        raise EmptyInputError('training needs at least one well')
    raw_patches = [extract_patch(seismic, col, patch_width) for col in wells]
    raw_logs = [ai.values[:, col].astype(np.float64) for col in wells]
    seismic_norm = normalize_fit(np.stack(raw_patches))
    impedance_norm = normalize_fit(np.stack(raw_logs))
    samples = [
        TrainingSample(
            patch=seismic_norm.apply(patch).astype(np.float32),
            target=impedance_norm.apply(log).astype(np.float32),
            well_column=int(col),
        )
        for patch, log, col in zip(raw_patches, raw_logs, wells)
    ]
    logger.info("Built dataset of %d wells, patch width %d", len(samples), patch_width)
    return WellDataset(samples, seismic_norm, impedance_norm, patch_width, list(wells))
