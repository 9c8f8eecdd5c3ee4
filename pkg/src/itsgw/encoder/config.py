"""Encoder hyperparameter record and validation."""

from __future__ import annotations

from dataclasses import dataclass

from ..core.errors import ItsgwError


class InvalidConfig(ItsgwError):
    pass


@dataclass(frozen=True)
class EncoderConfig:
    """Shape of the classifier: token mode sets vocab_size, feature mode
    sets feature_dim (257 spectrogram bins); exactly one of the two."""

    n_layers: int
    n_heads: int
    d_model: int
    d_ff: int
    max_len: int
    n_classes: int
    vocab_size: int | None = None
    feature_dim: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if (self.vocab_size is None) == (self.feature_dim is None):
            raise InvalidConfig("set exactly one of vocab_size and feature_dim")
        if self.n_layers < 0:
            raise InvalidConfig(f"n_layers must be >= 0, got {self.n_layers}")
        if self.n_heads < 1:
            raise InvalidConfig(f"n_heads must be >= 1, got {self.n_heads}")
        if self.d_model < 1 or self.d_ff < 1:
            raise InvalidConfig(f"d_model/d_ff must be >= 1, got {self.d_model}/{self.d_ff}")
        if self.d_model % self.n_heads:
            raise InvalidConfig(
                f"d_model {self.d_model} not divisible by {self.n_heads} heads"
            )
        if self.max_len < 4:
            raise InvalidConfig(f"max_len must be >= 4, got {self.max_len}")
        if self.n_classes < 2:
            raise InvalidConfig(f"n_classes must be >= 2, got {self.n_classes}")
        width = self.vocab_size if self.vocab_size is not None else self.feature_dim
        if width < 1:
            raise InvalidConfig(f"input width must be >= 1, got {width}")

    @property
    def mode(self) -> str:
        return "token_input" if self.vocab_size is not None else "feature_input"

    @property
    def input_width(self) -> int:
        return self.vocab_size if self.vocab_size is not None else self.feature_dim
