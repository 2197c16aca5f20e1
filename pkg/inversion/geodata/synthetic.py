"""
Synthetic Earth Models and Seismic Forward Modelling.

Layered impedance sections with undulating, dipping boundaries are turned
into seismic by normal-incidence reflectivity convolved with a Ricker
wavelet. Impedance and seismic share one vertical grid.
"""
from __future__ import annotations

import logging
from typing import Optional, Tuple

import numpy as np

from inversion.configs import SynthConfig
from inversion.errors import ConfigError, DomainError, ShapeError
from inversion.geodata.grid import GridKind, SectionGrid

logger = logging.getLogger(__name__)

SALT_IMPEDANCE_FACTOR = 1.15


######################################################################
# EARTH MODEL
######################################################################
def _layer_boundaries(
        config: SynthConfig,
        n_layers: int,
        rng: np.random.Generator
) -> np.ndarray:
    """(n_layers - 1) x n boundary depths, non-decreasing down each column."""
    if n_layers < 2:
        return np.empty((0, config.n))
    total_depth = config.d * config.dz
    x = np.arange(config.n) * config.dx
    base = np.sort(rng.uniform(0.05, 0.95, n_layers - 1)) * total_depth
    phase = rng.uniform(0.0, 2 * np.pi, n_layers - 1)
    dip = rng.uniform(-config.max_dip, config.max_dip, n_layers - 1)
    wave = np.sin(2 * np.pi * x[None, :] / config.undulation_wavelength_m
                  + phase[:, None])
    surfaces = (base[:, None]
                + config.undulation_amplitude_m * wave
                + dip[:, None] * (x[None, :] - x.mean()))
    # Crossing surfaces pinch the layer between them out.
    return np.maximum.accumulate(surfaces, axis=0)


def _layer_values(
        config: SynthConfig,
        n_layers: int,
        rng: np.random.Generator
) -> np.ndarray:
    """Per-layer impedance: a random draw blended with a top-to-bottom ramp."""
    draws = rng.uniform(0.0, 1.0, n_layers)
    ramp = np.arange(n_layers) / max(n_layers - 1, 1)
    weight = config.ai_trend
    fraction = (1.0 - weight) * draws + weight * ramp
    return config.ai_min + (config.ai_max - config.ai_min) * fraction


def _insert_salt(
        values: np.ndarray,
        config: SynthConfig,
        rng: np.random.Generator
) -> None:
    """Overwrites an elliptical region with high impedance, in place."""
    d, n = values.shape
    center_col = n * rng.uniform(0.3, 0.7)
    center_row = d * rng.uniform(0.45, 0.65)
    radius_col = max(n * 0.15, 1.0)
    radius_row = max(d * 0.12, 1.0)
    rows, cols = np.mgrid[0:d, 0:n]
    inside = (((rows - center_row) / radius_row) ** 2
              + ((cols - center_col) / radius_col) ** 2) <= 1.0
    values[inside] = config.ai_max * SALT_IMPEDANCE_FACTOR


def synth_earth(config: SynthConfig) -> SectionGrid:
    """Builds a layered impedance section.

    Deterministic for a given ``config.seed``.
    """
    rng = np.random.default_rng(config.seed)
    n_layers = int(rng.integers(config.layers_min, config.layers_max + 1))
    surfaces = _layer_boundaries(config, n_layers, rng)
    layer_ai = _layer_values(config, n_layers, rng)

    z = np.arange(config.d) * config.dz
    layer_index = (z[None, :, None] >= surfaces[:, None, :]).sum(axis=0)
    values = layer_ai[layer_index].reshape(config.d, config.n)
    if config.salt_body:
        _insert_salt(values, config, rng)

    logger.debug("Synthesized %d-layer impedance section %d x %d (seed %d)",
                 n_layers, config.d, config.n, config.seed)
    return SectionGrid(values, config.dz, config.dx, GridKind.IMPEDANCE)


######################################################################
# FORWARD MODELLING
######################################################################
def reflectivity(ai: np.ndarray) -> np.ndarray:
    """Normal-incidence reflection coefficients along axis 0.

    Accepts a d-vector or a d x n matrix; returns (d-1) rows.

    Raises:
        DomainError: If any impedance is not strictly positive.
    """
    ai = np.asarray(ai, dtype=np.float64)
    if np.any(~(ai > 0)):
        raise DomainError('reflectivity requires strictly positive impedance')
    return (ai[1:] - ai[:-1]) / (ai[1:] + ai[:-1])


def default_half_len(frequency: float, dt: float) -> int:
    """Samples needed for the wavelet to decay: ceil(1 / (f * dt))."""
    return int(np.ceil(1.0 / (frequency * dt)))


def ricker(frequency: float, dt: float, half_len: Optional[int] = None) -> np.ndarray:
    """Zero-phase Ricker wavelet sampled at k*dt, k in [-half_len, half_len].

    Raises:
        ConfigError: If the peak frequency is at or above Nyquist.
    """
    if frequency <= 0 or dt <= 0:
        raise ConfigError(f"ricker needs positive f and dt, got f={frequency}, dt={dt}")
    if frequency * dt >= 0.5:
        raise ConfigError(
            f"ricker frequency {frequency} Hz is at or above Nyquist {0.5 / dt} Hz"
        )
    if half_len is None:
        half_len = default_half_len(frequency, dt)
    if half_len < 0:
        raise ConfigError(f"ricker half_len must be >= 0, got {half_len}")
    t = np.arange(-half_len, half_len + 1) * dt
    arg = (np.pi * frequency * t) ** 2
    return (1.0 - 2.0 * arg) * np.exp(-arg)


def _convolve_same(trace: np.ndarray, wavelet: np.ndarray) -> np.ndarray:
    """Full convolution cropped so the wavelet center aligns with each sample."""
    half = len(wavelet) // 2
    return np.convolve(trace, wavelet)[half:half + len(trace)]


def forward_model(
        ai: SectionGrid,
        wavelet: np.ndarray,
        noise_snr: Optional[float] = None,
        rng: Optional[np.random.Generator] = None,
) -> SectionGrid:
    """Convolves each column's reflectivity with ``wavelet``.

    The reflectivity gets one leading zero so the output keeps depth d.
    With ``noise_snr`` set, white Gaussian noise is added at that SNR (dB)
    relative to the mean power of the whole noiseless section.

    Raises:
        ConfigError: If the wavelet length is even.
        DomainError: If impedance is not strictly positive.
    """
    wavelet = np.asarray(wavelet, dtype=np.float64)
    if wavelet.ndim != 1 or len(wavelet) % 2 == 0:
        raise ConfigError(f"wavelet must be an odd-length vector, got shape {wavelet.shape}")
    refl = np.zeros(ai.shape, dtype=np.float64)
    refl[1:] = reflectivity(ai.values)
    seismic = np.stack(
        [_convolve_same(refl[:, col], wavelet) for col in range(ai.n)], axis=1
    )

    if noise_snr is not None:
        rng = rng if rng is not None else np.random.default_rng()
        signal_power = float(np.mean(seismic ** 2))
        if signal_power == 0.0:
            logger.warning('Noiseless seismic has zero power; skipping noise')
        else:
            sigma = np.sqrt(signal_power / 10.0 ** (noise_snr / 10.0))
            seismic = seismic + rng.normal(0.0, sigma, seismic.shape)

    return SectionGrid(seismic, ai.dz, ai.dx, GridKind.SEISMIC, ai.time_axis)


def impedance_from_density_velocity(rho: SectionGrid, vp: SectionGrid) -> SectionGrid:
    """Elementwise density times P-velocity.

    Raises:
        ShapeError: If the grids differ in shape.
        DomainError: If either grid holds non-positive values.
    """
    if rho.shape != vp.shape:
        raise ShapeError(f"density {rho.shape} and velocity {vp.shape} grids differ")
    if np.any(rho.values <= 0) or np.any(vp.values <= 0):
        raise DomainError('density and velocity must be strictly positive')
    product = rho.values.astype(np.float64) * vp.values.astype(np.float64)
    return SectionGrid(product, rho.dz, rho.dx, GridKind.IMPEDANCE, rho.time_axis)


def synthesize(config: SynthConfig) -> Tuple[SectionGrid, SectionGrid]:
    """Impedance section and its noisy seismic, both from ``config.seed``."""
    ai = synth_earth(config)
    wavelet = ricker(config.frequency, config.dt, config.wavelet_half_len)
    noise_rng = np.random.default_rng([config.seed, 1])
    seismic = forward_model(ai, wavelet, config.snr_db, noise_rng)
    logger.info("Synthesized %d x %d section, f=%.1f Hz, SNR=%s dB",
                config.d, config.n, config.frequency, config.snr_db)
    return ai, seismic
