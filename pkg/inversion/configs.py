"""
Application Global Configuration.

Process-level settings come from the environment (``AppConfig``); experiment
settings come from a JSON run configuration (``RunConfig``) whose sections
mirror the synthetic generator, the network and the training loop.
"""
from __future__ import annotations

from typing import Any, Dict, List, Literal, Mapping, Optional, Tuple, Type, TypeVar

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from inversion.errors import ConfigError

ConfigT = TypeVar('ConfigT', bound=BaseModel)

FEATURE_WIDTH = 120
"""Channel count at the last feature-extractor block of the proposed network."""

VARIANTS = ('proposed2d', 'tcn1d', 'lstm')


######################################################################
# APPLICATION CONFIGURATION
######################################################################
class AppConfig(BaseSettings):
    """Encapsulates process-level settings.

    Retrieves settings from environment variables with sensible defaults.

    This class is immutable.
    """
    name: str = 'impedance-inversion'
    """The name of the application, retrieved from the NAME
    environment variable."""

    version: str = '1.0.0'
    """The version of the application, retrieved from the VERSION
    environment variable."""

    log_level: str = 'INFO'
    """Log level of the application, retrieved from the LOG_LEVEL
    environment variable."""

    debug_checks: bool = False
    """Whether every forward tensor op is checked for NaN/Inf values."""

    default_seed: int = 1337
    """Seed used when neither the run configuration nor ``--seed`` give one."""

    model_config = SettingsConfigDict(
        case_sensitive=False,
        extra='ignore',
        frozen=True,
    )


######################################################################
# EXPERIMENT CONFIGURATION
######################################################################
_SECTION_CONFIG = ConfigDict(extra='forbid', frozen=True)


class SynthConfig(BaseModel):
    """Desk-scale synthetic earth model and forward-modelling settings."""
    model_config = _SECTION_CONFIG

    d: int = Field(256, ge=2, description='Depth samples per trace.')
    n: int = Field(256, ge=1, description='Trace columns in the section.')
    dz: float = Field(5.0, gt=0, description='Depth-sample interval (m).')
    dx: float = Field(125.0, gt=0, description='Trace spacing (m).')
    layers_min: int = Field(8, ge=1, description='Minimum layer count.')
    layers_max: int = Field(14, ge=1, description='Maximum layer count.')
    ai_min: float = Field(4.0e6, gt=0, description='Lowest layer impedance.')
    ai_max: float = Field(9.0e6, gt=0, description='Highest layer impedance.')
    ai_trend: float = Field(
        0.3, ge=0, le=1,
        description='Weight of the increasing-with-depth trend in layer impedance.'
    )
    undulation_amplitude_m: float = Field(
        40.0, ge=0, description='Amplitude of boundary undulation (m).'
    )
    undulation_wavelength_m: float = Field(
        8000.0, gt=0, description='Wavelength of boundary undulation (m).'
    )
    max_dip: float = Field(
        0.02, ge=0, description='Largest boundary dip (m of depth per m).'
    )
    salt_body: bool = Field(
        False, description='Insert a high-impedance elliptical salt body.'
    )
    frequency: float = Field(25.0, gt=0, description='Ricker peak frequency (Hz).')
    dt: float = Field(
        0.002, gt=0,
        description='Equivalent vertical sample interval for the wavelet (s).'
    )
    wavelet_half_len: Optional[int] = Field(
        None, ge=1,
        description='Wavelet half length in samples; derived from 1/(f*dt) if unset.'
    )
    snr_db: Optional[float] = Field(
        20.0, description='Additive noise SNR in dB; null disables noise.'
    )
    well_spacing_m: float = Field(2000.0, gt=0, description='Well spacing (m).')
    seed: int = Field(1337, description='Generator seed.')

    @model_validator(mode='after')
    def check_ranges(self) -> 'SynthConfig':
        """Rejects degenerate ranges and wavelets above Nyquist."""
        if self.layers_max < self.layers_min:
            raise ConfigError(
                f"synth.layers_max ({self.layers_max}) must be >= "
                f"synth.layers_min ({self.layers_min})"
            )
        if self.ai_max < self.ai_min:
            raise ConfigError(
                f"synth.ai_max ({self.ai_max}) must be >= synth.ai_min ({self.ai_min})"
            )
        if self.frequency * self.dt >= 0.5:
            raise ConfigError(
                f"synth.frequency {self.frequency} Hz is at or above Nyquist "
                f"{0.5 / self.dt} Hz for synth.dt {self.dt}"
            )
        if self.well_spacing_m < self.dx:
            raise ConfigError(
                f"synth.well_spacing_m ({self.well_spacing_m}) must be >= "
                f"synth.dx ({self.dx})"
            )
        return self


class ModelConfig(BaseModel):
    """Architecture of the proposed network and its two baselines."""
    model_config = _SECTION_CONFIG

    variant: Literal['proposed2d', 'tcn1d', 'lstm'] = Field(
        'proposed2d', description='Network variant.'
    )
    patch_width: int = Field(7, ge=1, description='Patch width m (odd).')
    depth: int = Field(256, ge=1, description='Patch depth d.')
    block_channels: List[int] = Field(
        default_factory=lambda: [16, 32, 64, 96, 120],
        description='Output channels of each temporal block.'
    )
    dilations: List[int] = Field(
        default_factory=lambda: [1, 2, 4, 8, 16],
        description='Depth dilation of each temporal block.'
    )
    kernel: Tuple[int, int] = Field(
        (5, 3), description='Feature kernel (height, width), both odd.'
    )
    head_kernel_height: int = Field(
        3, ge=1, description='Kernel height of the head convolutions.'
    )
    head_channels: List[int] = Field(
        default_factory=lambda: [60, 30],
        description='Hidden channels of both 3-layer heads.'
    )
    causal: bool = Field(False, description='Use one-sided depth padding.')
    dropout_p: float = Field(
        0.2, ge=0, lt=1, description='Dropout inside temporal blocks.'
    )
    lstm_hidden: int = Field(64, ge=1, description='LSTM hidden size.')

    @model_validator(mode='before')
    @classmethod
    def collapse_baseline_width(cls, data: Any) -> Any:
        """Baselines see only the center trace: m = 1 and kw = 1."""
        if isinstance(data, dict) and data.get('variant') in ('tcn1d', 'lstm'):
            data = dict(data)
            data['patch_width'] = 1
            kernel = data.get('kernel', (5, 3))
            # anything but a pair is left for field validation to reject
            if isinstance(kernel, (list, tuple)) and len(kernel) == 2:
                data['kernel'] = (kernel[0], 1)
        return data

    @model_validator(mode='after')
    def check_architecture(self) -> 'ModelConfig':
        """Enforces the architectural invariants."""
        if self.patch_width % 2 == 0:
            raise ConfigError(
                f"model.patch_width must be odd, got {self.patch_width}"
            )
        if not self.block_channels:
            raise ConfigError('model.block_channels must not be empty')
        if len(self.block_channels) != len(self.dilations):
            raise ConfigError(
                f"model.dilations has {len(self.dilations)} entries but "
                f"model.block_channels has {len(self.block_channels)}"
            )
        if any(c < 1 for c in self.block_channels):
            raise ConfigError('model.block_channels entries must be >= 1')
        if any(dil < 1 for dil in self.dilations):
            raise ConfigError('model.dilations entries must be >= 1')
        if any(k < 1 or k % 2 == 0 for k in self.kernel):
            raise ConfigError(f"model.kernel sizes must be odd, got {self.kernel}")
        if self.head_kernel_height % 2 == 0:
            raise ConfigError('model.head_kernel_height must be odd')
        if len(self.head_channels) != 2 or any(c < 1 for c in self.head_channels):
            raise ConfigError('model.head_channels must hold two positive sizes')
        if (self.variant == 'proposed2d'
                and self.block_channels[-1] != FEATURE_WIDTH):
            raise ConfigError(
                f"model.block_channels must end at {FEATURE_WIDTH} for "
                f"proposed2d, got {self.block_channels[-1]}"
            )
        return self


class TrainConfig(BaseModel):
    """Training protocol: joint loss weights, Adam and augmentation."""
    model_config = _SECTION_CONFIG

    epochs: int = Field(1000, ge=1, description='Training epochs.')
    batch_size: int = Field(14, ge=1, description='Samples per batch.')
    lr: float = Field(0.001, gt=0, description='Adam learning rate.')
    weight_decay: float = Field(
        0.0001, ge=0, description='Decoupled weight decay.'
    )
    alpha: float = Field(1.0, ge=0, description='Regression loss weight.')
    beta: float = Field(0.5, ge=0, description='Reconstruction loss weight.')
    flip_prob: float = Field(
        0.5, ge=0, le=1, description='Horizontal flip probability.'
    )
    adam_betas: Tuple[float, float] = Field(
        (0.9, 0.999), description='Adam moment decay rates.'
    )
    adam_eps: float = Field(1e-8, gt=0, description='Adam epsilon.')
    seed: int = Field(1337, description='Training seed.')
    log_every: int = Field(50, ge=1, description='Epochs between progress logs.')

    @model_validator(mode='after')
    def check_betas(self) -> 'TrainConfig':
        """Adam decay rates must lie in [0, 1)."""
        if any(not 0 <= b < 1 for b in self.adam_betas):
            raise ConfigError(
                f"train.adam_betas must lie in [0, 1), got {self.adam_betas}"
            )
        return self


class RunConfig(BaseModel):
    """Complete run description parsed from a single JSON document."""
    model_config = _SECTION_CONFIG

    synth: SynthConfig = Field(default_factory=SynthConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    data_dir: Optional[str] = Field(
        None, description='Data directory used when --data is omitted; synth writes here.'
    )
    out_dir: Optional[str] = Field(
        None, description='Output directory used by train and predict when --out is omitted.'
    )


######################################################################
# HELPERS
######################################################################
def parse_config(
        config_cls: Type[ConfigT],
        data: Mapping[str, Any]
) -> ConfigT:
    """Validates a mapping into a config model.

    Args:
        config_cls: The pydantic model class to build.
        data: Raw key/value data (typically decoded JSON).

    Returns:
        The validated, frozen configuration.

    Raises:
        ConfigError: If a field is unknown, mistyped or out of range. The
            message names the dotted field path.
    """
    try:
        return config_cls.model_validate(dict(data))
    except ValidationError as err:
        first = err.errors()[0]
        field = '.'.join(str(part) for part in first['loc']) or '<root>'
        raise ConfigError(
            f"Invalid configuration field '{field}': {first['msg']}",
            original_exception=err
        ) from err


def with_overrides(config: ConfigT, **updates: Any) -> ConfigT:
    """Returns a re-validated copy of ``config`` with ``updates`` applied."""
    payload: Dict[str, Any] = config.model_dump()
    payload.update(updates)
    return parse_config(type(config), payload)


def describe_defaults() -> str:
    """Renders every run-config default as ``section.field = value`` lines."""
    lines = []
    for section, model_cls in (
            ('synth', SynthConfig),
            ('model', ModelConfig),
            ('train', TrainConfig),
    ):
        defaults = model_cls().model_dump()
        for name, info in model_cls.model_fields.items():
            lines.append(
                f"  {section}.{name} = {defaults[name]!r}  ({info.description})"
            )
    return '\n'.join(lines)
