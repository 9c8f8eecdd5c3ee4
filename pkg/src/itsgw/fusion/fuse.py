"""Late fusion of per-modality class distributions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core.errors import ItsgwError, SchemaMismatch, ValidationFailed
from ..core.records import Modality

DISTRIBUTION_SUM_TOL = 1e-9


class AllZeroWeights(ItsgwError):
    """Every posterior offered for fusion carries zero weight."""


@dataclass(frozen=True)
class ModalityPosterior:
    """One modality's class distribution plus its fusion weight."""

    modality: Modality
    distribution: tuple[float, ...]
    weight: float = 1.0

    def __post_init__(self) -> None:
        if len(self.distribution) == 0:
            raise ValidationFailed("distribution must have at least one class")
        values = np.asarray(self.distribution, dtype=np.float64)
        if not np.all(np.isfinite(values)):
            raise ValidationFailed("distribution entries must be finite")
        if np.any(values < 0.0):
            raise ValidationFailed("distribution entries must be non-negative")
        total = float(values.sum())
        if abs(total - 1.0) > DISTRIBUTION_SUM_TOL:
            raise ValidationFailed(
                f"distribution sums to {total!r}, expected 1 within {DISTRIBUTION_SUM_TOL}"
            )
        if not np.isfinite(self.weight) or self.weight < 0.0:
            raise ValidationFailed("weight must be a finite non-negative number")


@dataclass(frozen=True)
class FusedPrediction:
    """Result of late fusion: the combined distribution and its argmax class."""

    distribution: tuple[float, ...]
    predicted_class: int
    total_weight: float = field(default=1.0)


def fuse_late(posteriors: list[ModalityPosterior]) -> FusedPrediction:
    """Combine per-modality distributions as a weight-normalized average.

    The fused vector is ``sum(w_m * p_m) / sum(w_m)``. The predicted class is
    the argmax of the fused vector; exact ties resolve to the lowest index.
    """
    if not posteriors:
        raise AllZeroWeights("no posteriors to fuse")
    n_classes = len(posteriors[0].distribution)
    for posterior in posteriors[1:]:
        if len(posterior.distribution) != n_classes:
            raise SchemaMismatch(
                f"distribution lengths differ: {n_classes} vs {len(posterior.distribution)}"
            )
    total_weight = float(sum(p.weight for p in posteriors))
    if total_weight <= 0.0:
        raise AllZeroWeights("sum of fusion weights must be positive")
    fused = np.zeros(n_classes, dtype=np.float64)
    for posterior in posteriors:
        fused += posterior.weight * np.asarray(posterior.distribution, dtype=np.float64)
    fused /= total_weight
    predicted = int(np.argmax(fused))  # np.argmax returns the first (lowest) max index
    return FusedPrediction(
        distribution=tuple(float(v) for v in fused),
        predicted_class=predicted,
        total_weight=total_weight,
    )


def weights_from_accuracy(accuracy_by_modality: dict[Modality, float]) -> dict[Modality, float]:
    """Derive default fusion weights from last-evaluation accuracies, renormalized."""
    if not accuracy_by_modality:
        return {}
    for modality, accuracy in accuracy_by_modality.items():
        if not (0.0 <= accuracy <= 1.0):
            raise ValidationFailed(f"accuracy for {modality.value} outside [0, 1]: {accuracy!r}")
    total = sum(accuracy_by_modality.values())
    if total <= 0.0:
        uniform = 1.0 / len(accuracy_by_modality)
        return {modality: uniform for modality in accuracy_by_modality}
    return {modality: acc / total for modality, acc in accuracy_by_modality.items()}
