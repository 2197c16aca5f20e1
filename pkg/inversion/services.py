"""
Inversion Service.

This module provides the InversionService class, which encapsulates the
workflow behind each command: synthesizing data, training, predicting,
evaluating, converting SEG-Y and running the gradient suite. Every
operation writes the fully-resolved run configuration beside its outputs.
"""
from __future__ import annotations

import json
import logging
import pathlib
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np

from inversion.common.emitters import read_csv, write_csv, write_json, write_pgm
from inversion.configs import ModelConfig, RunConfig, parse_config, with_overrides
from inversion.errors import ConfigError, DataError, WellIndexError
from inversion.geodata.dataset import build_dataset, sample_wells
from inversion.geodata.grid import GridKind, SectionGrid, read_grid, write_grid
from inversion.geodata.synthetic import impedance_from_density_velocity, synthesize
from inversion.models import Network, build_model
from inversion.schemas import GradCheckReport, MetricsReportDTO
from inversion.segy import read_segy, segy_to_grid
from inversion.training.checkpoint import load_checkpoint, save_checkpoint
from inversion.training.metrics import (
    TRACE_TABLE_HEADER,
    evaluate_section,
    held_out_columns,
    trace_table,
)
from inversion.training.trainer import TrainedModel, predict_section, train
from inversion.verification import run_gradient_suite

logger = logging.getLogger(__name__)

PathLike = Union[str, pathlib.Path]

AI_FILE = 'ai.sgrd'
SEISMIC_FILE = 'seismic.sgrd'
WELLS_FILE = 'wells.csv'
PREDICTED_FILE = 'predicted.sgrd'
RUN_CONFIG_FILE = 'run_config.json'
WELLS_HEADER = ('well', 'column', 'x_m')


######################################################################
# CONFIGURATION
######################################################################
def load_run_config(path: Optional[PathLike]) -> RunConfig:
    """Reads a JSON run configuration; None gives all defaults.

    Raises:
        ConfigError: If the file is missing, not JSON, or invalid.
    """
    if path is None:
        return RunConfig()
    path = pathlib.Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        document = json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as err:
        raise ConfigError(f"config file {path} is not valid JSON: {err}",
                          original_exception=err) from err
    if not isinstance(document, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return parse_config(RunConfig, document)


def apply_cli_overrides(
        config: RunConfig,
        variant: Optional[str] = None,
        seed: Optional[int] = None
) -> RunConfig:
    """Applies ``--variant`` and ``--seed`` on top of a run configuration.

    Switching a baseline config to ``proposed2d`` restores the default patch
    width and kernel, which the baselines collapse to a single trace.

    Raises:
        ConfigError: If the overridden model config is invalid.
    """
    updates = {}
    if variant is not None:
        model_updates = {'variant': variant}
        if variant == 'proposed2d' and config.model.variant != 'proposed2d':
            fields = ModelConfig.model_fields
            model_updates['patch_width'] = fields['patch_width'].default
            model_updates['kernel'] = fields['kernel'].default
        updates['model'] = with_overrides(config.model, **model_updates)
    if seed is not None:
        updates['synth'] = with_overrides(config.synth, seed=seed)
        updates['train'] = with_overrides(config.train, seed=seed)
    return config.model_copy(update=updates) if updates else config


@dataclass(frozen=True)
class SectionData:
    """A data directory's contents."""
    ai: Optional[SectionGrid]
    seismic: SectionGrid
    wells: List[int]


######################################################################
# SERVICE
######################################################################
class InversionService:
    """Runs the synth / train / predict / eval workflow for one run config."""

    def __init__(self, config: RunConfig) -> None:
        """Initializes the InversionService.

        Args:
            config: Fully-resolved run configuration.
        """
        if config is None:
            error_message = 'A run configuration is required.'
            logger.error(error_message)
            raise ConfigError(error_message)
        self.config = config
        logger.debug("InversionService initialized for variant %s", config.model.variant)

    # --- helpers ---
    def echo_config(self, directory: PathLike, config: Optional[RunConfig] = None) -> None:
        """Writes the resolved run configuration into ``directory``."""
        directory = pathlib.Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        write_json(directory / RUN_CONFIG_FILE, config or self.config)

    def load_data(self, data_dir: PathLike, require_ai: bool = True) -> SectionData:
        """Reads ai.sgrd, seismic.sgrd and wells.csv from ``data_dir``.

        Without wells.csv, wells are sampled at ``synth.well_spacing_m``.

        Raises:
            GridFormatError: If a grid file is missing or malformed.
            WellIndexError: If a listed well is outside the section.
        """
        data_dir = pathlib.Path(data_dir)
        seismic = read_grid(data_dir / SEISMIC_FILE)
        ai_path = data_dir / AI_FILE
        ai = read_grid(ai_path) if require_ai or ai_path.is_file() else None
        wells_path = data_dir / WELLS_FILE
        if wells_path.is_file():
            try:
                wells = [int(row['column']) for row in read_csv(wells_path)]
            except (KeyError, ValueError) as err:
                raise DataError(f"{wells_path}: malformed 'column' field",
                                original_exception=err) from err
        else:
            wells = sample_wells(seismic, self.config.synth.well_spacing_m)
        bad = [w for w in wells if not 0 <= w < seismic.n]
        if bad:
            raise WellIndexError(f"{wells_path}: well columns {bad} outside section")
        return SectionData(ai, seismic, wells)

    # --- operations ---
    def synthesize(self, out_dir: PathLike) -> SectionData:
        """Generates and writes a synthetic impedance/seismic pair with wells."""
        out_dir = pathlib.Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        ai, seismic = synthesize(self.config.synth)
        wells = sample_wells(ai, self.config.synth.well_spacing_m)
        write_grid(out_dir / AI_FILE, ai)
        write_grid(out_dir / SEISMIC_FILE, seismic)
        write_csv(out_dir / WELLS_FILE, WELLS_HEADER,
                  [(i, col, col * ai.dx) for i, col in enumerate(wells)])
        write_pgm(out_dir / 'ai.pgm', ai.values)
        write_pgm(out_dir / 'seismic.pgm', seismic.values)
        self.echo_config(out_dir)
        return SectionData(ai, seismic, wells)

    def train(self, data_dir: PathLike, out_dir: PathLike) -> TrainedModel:
        """Trains the configured variant on a data directory and checkpoints it."""
        data = self.load_data(data_dir)
        model_config = self.config.model
        if model_config.depth != data.seismic.d:
            logger.info("Setting model depth to section depth %d", data.seismic.d)
            model_config = with_overrides(model_config, depth=data.seismic.d)
        config = self.config.model_copy(update={'model': model_config})
        dataset = build_dataset(data.ai, data.seismic, data.wells, model_config.patch_width)
        logger.info("Dataset digest %s", dataset.digest())
        params = build_model(model_config, np.random.default_rng(config.train.seed))
        trained = train(Network(model_config, params), dataset, config.train,
                        np.random.default_rng([config.train.seed, 1]))
        trained.run_config = config
        save_checkpoint(trained, out_dir)
        self.echo_config(out_dir, config)
        return trained

    def predict(
            self,
            ckpt_dir: PathLike,
            data_dir: PathLike,
            out_dir: PathLike,
            columns: Sequence[int] = (),
    ) -> SectionGrid:
        """Predicts the whole section and writes SGRD, PGM and trace CSV."""
        trained = load_checkpoint(ckpt_dir)
        data = self.load_data(data_dir, require_ai=False)
        predicted = predict_section(trained, data.seismic)
        out_dir = pathlib.Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_grid(out_dir / PREDICTED_FILE, predicted)
        write_pgm(out_dir / 'predicted.pgm', predicted.values)
        if columns:
            write_csv(out_dir / 'traces.csv', TRACE_TABLE_HEADER,
                      trace_table(predicted, data.ai, columns))
        self.echo_config(out_dir, trained.run_config)
        return predicted

    def evaluate(
            self,
            ckpt_dir: PathLike,
            data_dir: PathLike,
            report_path: PathLike,
            columns: Sequence[int] = (),
    ) -> MetricsReportDTO:
        """Predicts, scores against the true section and writes report.json."""
        trained = load_checkpoint(ckpt_dir)
        data = self.load_data(data_dir)
        predicted = predict_section(trained, data.seismic)
        metrics = evaluate_section(predicted, data.ai)
        wells = trained.wells or data.wells
        held_out = evaluate_section(predicted, data.ai,
                                    held_out_columns(data.ai.n, wells))
        report = MetricsReportDTO.from_metrics(trained.config.variant, metrics, held_out)
        report_path = pathlib.Path(report_path)
        report_path.parent.mkdir(parents=True, exist_ok=True)
        write_json(report_path, report)
        if columns:
            traces = report_path.with_name(f"{report_path.stem}_traces.csv")
            write_csv(traces, TRACE_TABLE_HEADER, trace_table(predicted, data.ai, columns))
        self.echo_config(report_path.parent, trained.run_config)
        logger.info("%s: avg PCC %.4f, avg r2 %.4f over %d traces",
                    report.variant, metrics.avg_pcc, metrics.avg_r2, metrics.n_traces)
        return report

    @staticmethod
    def convert_segy(
            out_path: PathLike,
            dx: float,
            input_path: Optional[PathLike] = None,
            density_path: Optional[PathLike] = None,
            velocity_path: Optional[PathLike] = None,
            dz: Optional[float] = None,
            kind: GridKind = GridKind.SEISMIC,
    ) -> SectionGrid:
        """Converts one SEG-Y line, or a density/velocity pair, to SGRD.

        Raises:
            ConfigError: Unless exactly one of ``input_path`` or the
                density/velocity pair is given.
        """
        pair = density_path is not None and velocity_path is not None
        if (input_path is None) == (not pair) or (
                (density_path is None) != (velocity_path is None)):
            raise ConfigError(
                'segy-convert needs either --input or both --density and --velocity'
            )
        if pair:
            rho = segy_to_grid(read_segy(density_path), dx, dz, GridKind.DENSITY)
            vp = segy_to_grid(read_segy(velocity_path), dx, dz, GridKind.VELOCITY)
            grid = impedance_from_density_velocity(rho, vp)
        else:
            grid = segy_to_grid(read_segy(input_path), dx, dz, kind)
        pathlib.Path(out_path).parent.mkdir(parents=True, exist_ok=True)
        write_grid(out_path, grid)
        return grid

    @staticmethod
    def gradcheck(trials: int, seed: int) -> List[GradCheckReport]:
        """Runs the randomized gradient suite."""
        return run_gradient_suite(trials=trials, seed=seed)
