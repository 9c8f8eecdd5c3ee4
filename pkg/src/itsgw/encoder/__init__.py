"""Encoder classifier: config, model, AdamW, training, MACs, checkpoints."""

from .adamw import AdamW, adamw_update
from .checkpoint import MalformedCheckpoint, load_checkpoint, save_checkpoint
from .config import EncoderConfig, InvalidConfig
from .macs import count_macs, macs_to_gop
from .model import EncoderModel, forward_classify, init_model
from .train import (
    SPEED_CLASS_NAMES,
    SPEED_SCHEMA,
    EmptyDataset,
    TrainLog,
    evaluate_accuracy,
    prepare_text_dataset,
    synthetic_speed_records,
    train,
)

__all__ = [
    "SPEED_CLASS_NAMES",
    "SPEED_SCHEMA",
    "AdamW",
    "EmptyDataset",
    "EncoderConfig",
    "EncoderModel",
    "InvalidConfig",
    "MalformedCheckpoint",
    "TrainLog",
    "adamw_update",
    "count_macs",
    "evaluate_accuracy",
    "forward_classify",
    "init_model",
    "load_checkpoint",
    "macs_to_gop",
    "prepare_text_dataset",
    "save_checkpoint",
    "synthetic_speed_records",
    "train",
]
