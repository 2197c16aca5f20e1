"""
Test Suite Fixtures.

Test cases can be run with the following:
  pytest -v --cov=inversion --cov-report=term-missing --cov-branch
"""
import json
import logging
import pathlib

import numpy as np
import pytest

from inversion.configs import RunConfig
from inversion.geodata.synthetic import synthesize
from inversion.services import InversionService
from tests import (
    SMALL_SYNTH,
    TEST_SEED,
    TINY_TCN1D,
    small_synth_config,
)

logger = logging.getLogger(__name__)


############################################################
# TEST FIXTURES
############################################################
@pytest.fixture
def rng() -> np.random.Generator:
    """A seeded generator, fresh for every test."""
    return np.random.default_rng(TEST_SEED)


@pytest.fixture
def small_sections():
    """A noiseless (impedance, seismic) pair of 16 x 24 samples."""
    return synthesize(small_synth_config())


@pytest.fixture
def run_config_dict() -> dict:
    """A run configuration for a fast tcn1d run on a small section."""
    return {
        'synth': dict(SMALL_SYNTH),
        'model': dict(TINY_TCN1D),
        'train': {'epochs': 2, 'batch_size': 4, 'log_every': 1, 'seed': TEST_SEED},
    }


@pytest.fixture
def config_file(tmp_path: pathlib.Path, run_config_dict: dict) -> pathlib.Path:
    """The run configuration written as JSON."""
    path = tmp_path / 'cfg.json'
    path.write_text(json.dumps(run_config_dict), encoding='utf-8')
    return path


@pytest.fixture
def data_dir(tmp_path: pathlib.Path, run_config_dict: dict) -> pathlib.Path:
    """A synthesized data directory."""
    out = tmp_path / 'data'
    InversionService(RunConfig.model_validate(run_config_dict)).synthesize(out)
    logger.debug("Synthesized test data in %s", out)
    return out
