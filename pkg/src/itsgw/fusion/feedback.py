"""Accuracy-window feedback loop that requests retraining when quality drops."""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass

from ..core.errors import ValidationFailed
from ..core.records import Modality

DEFAULT_WINDOW = 100
DEFAULT_THRESHOLD = 0.85


@dataclass(frozen=True)
class RetrainEvent:
    """Advisory signal that a modality's rolling accuracy fell below threshold."""

    modalities: frozenset[Modality]
    window_accuracy: float


class FeedbackState:
    """Rolling window of prediction-correctness bits for one modality stream.

    Updates are serialized with an internal lock so concurrent workers on the
    same stream cannot interleave push/evict/measure.
    """

    def __init__(
        self,
        modality: Modality,
        window: int = DEFAULT_WINDOW,
        threshold: float = DEFAULT_THRESHOLD,
    ) -> None:
        if window < 1:
            raise ValidationFailed("window must be at least 1")
        if not (0.0 < threshold < 1.0):
            raise ValidationFailed("threshold must lie strictly between 0 and 1")
        self.modality = modality
        self.window = window
        self.threshold = threshold
        self._bits: deque[int] = deque(maxlen=window)
        self._lock = threading.Lock()

    def __len__(self) -> int:
        with self._lock:
            return len(self._bits)

    @property
    def is_warmed_up(self) -> bool:
        with self._lock:
            return len(self._bits) == self.window

    def window_accuracy(self) -> float | None:
        """Mean of the current bits, or None while the window is still filling."""
        with self._lock:
            if len(self._bits) < self.window:
                return None
            return sum(self._bits) / self.window


def feedback_update(state: FeedbackState, correct: bool) -> RetrainEvent | None:
    """Record one correctness bit; emit a RetrainEvent on a full, sub-threshold window.

    The oldest bit is evicted once the window holds more than its capacity.
    Nothing is emitted during warm-up (window not yet full) or when the window
    mean is greater than or equal to the threshold (strict inequality trigger).
    """
    with state._lock:
        state._bits.append(1 if correct else 0)
        if len(state._bits) < state.window:
            return None
        accuracy = sum(state._bits) / state.window
    if accuracy < state.threshold:
        return RetrainEvent(modalities=frozenset({state.modality}), window_accuracy=accuracy)
    return None
