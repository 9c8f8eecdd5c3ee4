"""Analytic multiply-accumulate counting for the encoder.

Counts MACs in linear maps and attention score/value products only;
layer norm, softmax, and GELU are excluded. Per layer at sequence
length S and width d: 4*S*d^2 (Q/K/V/O projections), 2*S^2*d (scores
and weighted values), 2*S*d*d_ff (FFN pair); plus d*n_classes for the
head. GOP = MACs * 1e-9.
"""

from __future__ import annotations

from ..core.errors import ItsgwError
from .config import EncoderConfig


def count_macs(config: EncoderConfig, seq_len: int) -> int:
    if seq_len < 1 or seq_len > config.max_len:
        raise ItsgwError(f"seq_len {seq_len} outside 1..{config.max_len}")
    d = config.d_model
    per_layer = 4 * seq_len * d * d + 2 * seq_len * seq_len * d + 2 * seq_len * d * config.d_ff
    return config.n_layers * per_layer + d * config.n_classes


def macs_to_gop(macs: int) -> float:
    return macs * 1e-9
