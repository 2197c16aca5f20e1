"""
Package: inversion.

Seismic acoustic-impedance inversion toolkit: a numpy reverse-mode autodiff
core, dilated 2-D temporal convolutional networks with their 1-D TCN and LSTM
baselines, synthetic forward modelling, SEG-Y ingestion and a command line.
"""
from __future__ import annotations

import logging
import os

from cba_core_lib.logging import init_logging
from dotenv import load_dotenv

from inversion.configs import AppConfig

# Get the package logger
logger = logging.getLogger('inversion')


# --- Configuration and Environment Setup ---

def load_environment_variables() -> None:
    """Loads environment variables from a .env file into the operating system's
    environment.

    The file is ``.env`` in the project root, or ``.env.<APP_SETTINGS>`` when
    the APP_SETTINGS variable is set. A missing or unreadable file is logged
    and otherwise ignored.

    Returns:
        None: This function modifies the operating system's environment and
        does not return a value.
    """
    env = os.environ.get('APP_SETTINGS')
    base_dir = os.path.dirname(os.path.dirname(__file__))
    dotenv_filename = '.env' if not env else f'.env.{env}'
    dotenv_path = os.path.join(base_dir, dotenv_filename)
    logger.debug("Loading environment variables from: %s", dotenv_path)
    try:
        if os.path.exists(dotenv_path):
            load_dotenv(dotenv_path)
            logger.info("Environment variables loaded from %s", dotenv_path)
        else:
            logger.debug("Dotenv file not found at %s", dotenv_path)
    except UnicodeDecodeError as err:
        logger.error(
            "Encoding error in dotenv file: %s: %s",
            dotenv_path,
            err
        )
    except OSError as err:
        logger.error(
            "OS error reading dotenv file: %s: %s",
            dotenv_path,
            err
        )


# Load environment at startup
load_environment_variables()

# Application configuration
app_config = AppConfig()

# Every module logger is a child of the package logger.
init_logging(logger, log_level=app_config.log_level)
