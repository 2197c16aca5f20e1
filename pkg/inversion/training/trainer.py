"""
Training loop and section-wide prediction.

Each epoch shuffles the wells, splits them into batches, draws one flip
decision per sample, and takes one Adam step per batch on the joint loss.
All randomness (shuffle, flips, dropout) comes from one generator, so a
fixed seed reproduces the loss history bitwise.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from inversion.autodiff.tensor import Tensor, backward, no_grad
from inversion.configs import ModelConfig, RunConfig, TrainConfig
from inversion.errors import DivergenceError, EmptyInputError, ShapeError
from inversion.geodata.dataset import Norm, WellDataset, extract_patch
from inversion.geodata.grid import GridKind, SectionGrid
from inversion.models import ModelParams, Network, model_forward
from inversion.training.losses import joint_loss
from inversion.training.optimizer import Adam, AdamState

logger = logging.getLogger(__name__)

PREDICT_BATCH = 32
MIN_PREDICTED_IMPEDANCE = 1.0


@dataclass(frozen=True)
class EpochRecord:
    """Sample-weighted mean losses of one epoch."""
    epoch: int
    loss: float
    loss_y: float
    loss_x: float


@dataclass
class TrainedModel:
    """Everything needed to predict, evaluate or resume.

    Attributes:
        config: Architecture the parameters belong to.
        params: Trained parameters.
        seismic_norm: Normalization fitted on training patches.
        impedance_norm: Normalization fitted on training logs.
        optimizer_state: Adam moments and step counter.
        history: One record per completed epoch.
        train_config: Protocol used for training, if any.
        wells: Training well columns.
    """
    config: ModelConfig
    params: ModelParams
    seismic_norm: Norm
    impedance_norm: Norm
    optimizer_state: Optional[AdamState] = None
    history: List[EpochRecord] = field(default_factory=list)
    train_config: Optional[TrainConfig] = None
    wells: List[int] = field(default_factory=list)
    run_config: Optional[RunConfig] = None

    @property
    def epoch(self) -> int:
        """Completed epochs."""
        return self.history[-1].epoch if self.history else 0

    @property
    def network(self) -> Network:
        """Configuration and parameters as one callable network."""
        return Network(self.config, self.params)


def train(
        network: Network,
        dataset: WellDataset,
        config: TrainConfig,
        rng: Optional[np.random.Generator] = None,
) -> TrainedModel:
    """Fits ``network`` to ``dataset`` in place.

    Args:
        network: Model configuration and initialized parameters.
        dataset: Normalized well samples.
        config: Training protocol.
        rng: Shuffle, flip and dropout randomness; defaults to ``config.seed``.

    Returns:
        TrainedModel: Parameters, norms, optimizer state and loss history.

    Raises:
        EmptyInputError: If the dataset has no samples.
        ShapeError: If the samples do not fit the network.
        DivergenceError: If the loss becomes NaN or infinite.
    """
    if len(dataset) == 0:
        raise EmptyInputError('cannot train on an empty dataset')
    if dataset.patch_width != network.config.patch_width:
        raise ShapeError(
            f"dataset patch width {dataset.patch_width} does not match "
            f"model patch width {network.config.patch_width}"
        )
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    params = network.params
    optimizer = Adam(params.tensors(), config)
    history: List[EpochRecord] = []
    count = len(dataset)
    logger.info("Training %s on %d wells for %d epochs (batch %d)",
                network.config.variant, count, config.epochs, config.batch_size)

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(count)
        sums = np.zeros(3)
        for start in range(0, count, config.batch_size):
            indices = order[start:start + config.batch_size]
            flips = rng.random(len(indices)) < config.flip_prob
            patches, targets = dataset.batch(indices, flips)
            x = Tensor(patches)
            y_hat, x_hat = model_forward(params, network.config, x, training=True, rng=rng)
            loss = joint_loss(y_hat, Tensor(targets), x_hat, x, config.alpha, config.beta)
            value = loss.total.item()
            if not math.isfinite(value):
                raise DivergenceError(f"loss became {value} at epoch {epoch}")
            optimizer.zero_grad()
            backward(loss.total)
            optimizer.step()
            sums += len(indices) * np.array([value, loss.loss_y, loss.loss_x])
        record = EpochRecord(epoch, *(float(s) for s in sums / count))
        history.append(record)
        if epoch == 1 or epoch % config.log_every == 0 or epoch == config.epochs:
            logger.info("Epoch %d/%d: loss %.6f (y %.6f, x %.6f)",
                        epoch, config.epochs, record.loss, record.loss_y, record.loss_x)

    return TrainedModel(
        config=network.config,
        params=params,
        seismic_norm=dataset.seismic_norm,
        impedance_norm=dataset.impedance_norm,
        optimizer_state=optimizer.state,
        history=history,
        train_config=config,
        wells=list(dataset.wells),
    )


def predict_section(
        trained: TrainedModel,
        seismic: SectionGrid,
        batch_size: int = PREDICT_BATCH
) -> SectionGrid:
    """Estimates impedance for every column of ``seismic``.

    Each column gets its own edge-replicated patch, so columns are
    predicted independently of one another.

    Raises:
        ShapeError: If the section depth differs from the trained depth.
    """
    config = trained.config
    if seismic.d != config.depth:
        raise ShapeError(
            f"section depth {seismic.d} does not match trained depth {config.depth}"
        )
    output = np.empty(seismic.shape, dtype=np.float64)
    with no_grad():
        for start in range(0, seismic.n, batch_size):
            cols = range(start, min(start + batch_size, seismic.n))
            patches = np.stack([
                extract_patch(seismic, col, config.patch_width) for col in cols
            ])
            x = Tensor(trained.seismic_norm.apply(patches).astype(np.float32))
            y_hat, _ = model_forward(trained.params, config, x)
            output[:, cols.start:cols.stop] = trained.impedance_norm.inverse(y_hat.data).T
    floored = int(np.sum(output < MIN_PREDICTED_IMPEDANCE))
    if floored:
        logger.warning("Raised %d non-positive predicted samples to %.1f",
                       floored, MIN_PREDICTED_IMPEDANCE)
        output = np.maximum(output, MIN_PREDICTED_IMPEDANCE)
    logger.info("Predicted %d x %d impedance section", seismic.d, seismic.n)
    return SectionGrid(output, seismic.dz, seismic.dx, GridKind.IMPEDANCE, seismic.time_axis)
