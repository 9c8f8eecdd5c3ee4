"""Late fusion of modality posteriors and the accuracy-feedback loop."""

from .feedback import (
    DEFAULT_THRESHOLD,
    DEFAULT_WINDOW,
    FeedbackState,
    RetrainEvent,
    feedback_update,
)
from .fuse import (
    AllZeroWeights,
    FusedPrediction,
    ModalityPosterior,
    SchemaMismatch,
    fuse_late,
    weights_from_accuracy,
)

__all__ = [
    "DEFAULT_THRESHOLD",
    "DEFAULT_WINDOW",
    "AllZeroWeights",
    "FeedbackState",
    "FusedPrediction",
    "ModalityPosterior",
    "RetrainEvent",
    "SchemaMismatch",
    "feedback_update",
    "fuse_late",
    "weights_from_accuracy",
]
