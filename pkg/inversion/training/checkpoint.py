"""
Checkpoint directories.

Layout::

    manifest.txt     UTF-8 key=value lines
    tensors/*.bin    one TNSR file per parameter and Adam moment
    history.csv      epoch,loss,loss_y,loss_x

Tensor entries read ``tensor.<name>=<file>;<d0>x<d1>...;<crc32>`` and
Adam moments ``adam.m.<name>`` / ``adam.v.<name>`` in the same form.
Floats are written with ``repr`` so they round-trip exactly.
"""
from __future__ import annotations

import json
import logging
import pathlib
import zlib
from typing import Dict, List, Tuple, Union

import numpy as np

from inversion.autodiff.serialization import decode_tensor, encode_tensor
from inversion.common.emitters import read_csv, write_csv
from inversion.configs import ModelConfig, RunConfig, TrainConfig, parse_config
from inversion.errors import (
    ChecksumError,
    CheckpointError,
    MissingTensorError,
    VersionError,
)
from inversion.geodata.dataset import Norm
from inversion.models import build_model
from inversion.training.optimizer import AdamState
from inversion.training.trainer import EpochRecord, TrainedModel

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1
MANIFEST = 'manifest.txt'
HISTORY = 'history.csv'
TENSOR_DIR = 'tensors'
HISTORY_HEADER = ('epoch', 'loss', 'loss_y', 'loss_x')

PathLike = Union[str, pathlib.Path]


######################################################################
# SAVE
######################################################################
def _shape_text(shape: Tuple[int, ...]) -> str:
    return 'x'.join(str(s) for s in shape) or 'scalar'


def _write_entry(root: pathlib.Path, key: str, values: np.ndarray) -> str:
    file_name = f"{key}.bin"
    blob = encode_tensor(values)
    (root / TENSOR_DIR / file_name).write_bytes(blob)
    return f"{TENSOR_DIR}/{file_name};{_shape_text(values.shape)};{zlib.crc32(blob):08x}"


def save_checkpoint(trained: TrainedModel, path: PathLike) -> pathlib.Path:
    """Writes ``trained`` to the directory ``path`` (created if needed).

    Returns:
        The checkpoint directory.
    """
    root = pathlib.Path(path)
    (root / TENSOR_DIR).mkdir(parents=True, exist_ok=True)
    lines = [
        f"version={CHECKPOINT_VERSION}",
        f"variant={trained.config.variant}",
        f"epoch={trained.epoch}",
        f"seismic_norm.mean={trained.seismic_norm.mean!r}",
        f"seismic_norm.std={trained.seismic_norm.std!r}",
        f"impedance_norm.mean={trained.impedance_norm.mean!r}",
        f"impedance_norm.std={trained.impedance_norm.std!r}",
        f"wells={','.join(str(w) for w in trained.wells)}",
        f"model_config={trained.config.model_dump_json()}",
    ]
    if trained.train_config is not None:
        lines.append(f"train_config={trained.train_config.model_dump_json()}")
    if trained.run_config is not None:
        lines.append(f"run_config={trained.run_config.model_dump_json()}")

    named = trained.params.named_tensors()
    for name, tensor in named:
        lines.append(f"tensor.{name}={_write_entry(root, name, tensor.data)}")
    state = trained.optimizer_state
    if state is not None:
        lines.append(f"adam.step={state.t}")
        for (name, _), m, v in zip(named, state.m, state.v):
            lines.append(f"adam.m.{name}={_write_entry(root, f'adam.m.{name}', m)}")
            lines.append(f"adam.v.{name}={_write_entry(root, f'adam.v.{name}', v)}")

    (root / MANIFEST).write_text('\n'.join(lines) + '\n', encoding='utf-8')
    write_csv(root / HISTORY, HISTORY_HEADER, (
        (r.epoch, repr(r.loss), repr(r.loss_y), repr(r.loss_x)) for r in trained.history
    ))
    logger.info("Saved %s checkpoint at epoch %d to %s",
                trained.config.variant, trained.epoch, root)
    return root


######################################################################
# LOAD
######################################################################
def read_manifest(path: PathLike) -> Dict[str, str]:
    """Parses ``manifest.txt`` into a dict.

    Raises:
        MissingTensorError: If the manifest itself is missing.
        CheckpointError: On a line without ``=``.
    """
    manifest = pathlib.Path(path) / MANIFEST
    if not manifest.is_file():
        raise MissingTensorError(f"checkpoint manifest not found: {manifest}")
    entries: Dict[str, str] = {}
    for number, line in enumerate(manifest.read_text(encoding='utf-8').splitlines(), 1):
        if not line.strip():
            continue
        key, sep, value = line.partition('=')
        if not sep:
            raise CheckpointError(f"{manifest}:{number}: expected key=value")
        entries[key.strip()] = value
    return entries


def _read_entry(root: pathlib.Path, key: str, entry: str) -> np.ndarray:
    try:
        file_name, shape_text, crc_text = entry.split(';')
    except ValueError as err:
        raise CheckpointError(f"malformed manifest entry for '{key}': {entry}") from err
    file_path = root / file_name
    if not file_path.is_file():
        raise MissingTensorError(f"tensor file for '{key}' not found: {file_path}")
    blob = file_path.read_bytes()
    values = decode_tensor(blob, source=str(file_path))
    if zlib.crc32(blob) != int(crc_text, 16):
        raise ChecksumError(f"CRC mismatch for tensor '{key}' in {file_path}")
    if _shape_text(values.shape) != shape_text:
        raise ChecksumError(
            f"tensor '{key}' has shape {values.shape}, manifest says {shape_text}"
        )
    return values


def _read_history(root: pathlib.Path) -> List[EpochRecord]:
    path = root / HISTORY
    if not path.is_file():
        return []
    return [
        EpochRecord(int(row['epoch']), float(row['loss']),
                    float(row['loss_y']), float(row['loss_x']))
        for row in read_csv(path)
    ]


def load_checkpoint(path: PathLike) -> TrainedModel:
    """Restores a checkpoint written by :func:`save_checkpoint`.

    Raises:
        VersionError: If the manifest version is not supported.
        MissingTensorError: If the manifest or a tensor file is missing,
            or the manifest lacks a parameter.
        ChecksumError: If a tensor file is truncated or corrupted.
    """
    root = pathlib.Path(path)
    manifest = read_manifest(root)
    version = manifest.get('version')
    if version != str(CHECKPOINT_VERSION):
        raise VersionError(
            f"checkpoint {root} has version {version}, expected {CHECKPOINT_VERSION}"
        )
    try:
        config = parse_config(ModelConfig, json.loads(manifest['model_config']))
        seismic_norm = Norm(float(manifest['seismic_norm.mean']),
                            float(manifest['seismic_norm.std']))
        impedance_norm = Norm(float(manifest['impedance_norm.mean']),
                              float(manifest['impedance_norm.std']))
    except KeyError as err:
        raise CheckpointError(f"checkpoint {root} manifest lacks {err}") from err

    def lookup(key: str) -> np.ndarray:
        if key not in manifest:
            raise MissingTensorError(f"checkpoint {root} manifest lists no tensor '{key}'")
        return _read_entry(root, key, manifest[key])

    params = build_model(config, np.random.default_rng(0))
    named = params.named_tensors()
    for name, tensor in named:
        tensor.data = lookup(f"tensor.{name}")

    state = None
    if 'adam.step' in manifest:
        state = AdamState(
            m=[lookup(f"adam.m.{n}") for n, _ in named],
            v=[lookup(f"adam.v.{n}") for n, _ in named],
            t=int(manifest['adam.step']),
        )

    wells_text = manifest.get('wells', '')
    trained = TrainedModel(
        config=config,
        params=params,
        seismic_norm=seismic_norm,
        impedance_norm=impedance_norm,
        optimizer_state=state,
        history=_read_history(root),
        train_config=(parse_config(TrainConfig, json.loads(manifest['train_config']))
                      if 'train_config' in manifest else None),
        wells=[int(w) for w in wells_text.split(',') if w],
        run_config=(parse_config(RunConfig, json.loads(manifest['run_config']))
                    if 'run_config' in manifest else None),
    )
    logger.info("Loaded %s checkpoint at epoch %d from %s",
                config.variant, trained.epoch, root)
    return trained
