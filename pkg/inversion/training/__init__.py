"""
Joint loss, Adam, the training loop, metrics and checkpoints.
"""
from inversion.training.checkpoint import load_checkpoint, save_checkpoint
from inversion.training.losses import JointLoss, joint_loss, total_loss
from inversion.training.metrics import (
    evaluate_section,
    held_out_columns,
    pcc,
    r2,
    trace_table,
)
from inversion.training.optimizer import Adam, AdamState, adam_step
from inversion.training.trainer import (
    EpochRecord,
    TrainedModel,
    predict_section,
    train,
)
