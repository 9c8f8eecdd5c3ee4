"""Length-sorted batch collation with per-batch max-length padding.

Sorting by frame count before chunking keeps similar lengths together,
so each batch pads only to its own maximum; ties keep submission order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.errors import ItsgwError, ShapeMismatch
from .features import N_BINS, FeatureSequence


@dataclass(frozen=True)
class CollatedBatch:
    features: np.ndarray  # B x T_max x F, padded cells exactly 0
    mask: np.ndarray  # B x T_max of {0,1}
    labels: tuple[int, ...]
    lengths: tuple[int, ...]  # original frame counts, sorted order

    def __post_init__(self) -> None:
        b, t_max, f = self.features.shape
        if self.mask.shape != (b, t_max) or f != N_BINS:
            raise ShapeMismatch(
                f"features {self.features.shape} vs mask {self.mask.shape}"
            )
        if len(self.labels) != b or len(self.lengths) != b:
            raise ShapeMismatch(f"{b} rows but {len(self.labels)} labels")


def collate_batch(
    items: list[tuple[FeatureSequence, int]], batch_size: int
) -> list[CollatedBatch]:
    """Sort by frame count descending (stable), chunk into groups of at
    most batch_size, pad each group to its own max length."""
    if batch_size < 1:
        raise ItsgwError(f"batch_size must be >= 1, got {batch_size}")
    if not items:
        raise ItsgwError("nothing to collate")
    order = sorted(range(len(items)), key=lambda i: -items[i][0].n_frames)
    batches = []
    for lo in range(0, len(order), batch_size):
        group = [items[i] for i in order[lo : lo + batch_size]]
        t_max = group[0][0].n_frames
        features = np.zeros((len(group), t_max, N_BINS))
        mask = np.zeros((len(group), t_max), dtype=np.int64)
        for row, (seq, _) in enumerate(group):
            features[row, : seq.n_frames] = seq.frames
            mask[row, : seq.n_frames] = 1
        batches.append(
            CollatedBatch(
                features=features,
                mask=mask,
                labels=tuple(label for _, label in group),
                lengths=tuple(seq.n_frames for seq, _ in group),
            )
        )
    return batches


def padding_ratio(batches: list[CollatedBatch]) -> float:
    """Padded cells over real cells across all batches."""
    padded = sum(b.mask.size - int(b.mask.sum()) for b in batches)
    real = sum(int(b.mask.sum()) for b in batches)
    return padded / real
