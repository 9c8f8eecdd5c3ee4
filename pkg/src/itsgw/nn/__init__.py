from .gradcheck import grad_check, sum_loss
from .layers import (
    EncoderBlock,
    FeedForward,
    Gelu,
    Layer,
    LayerNorm,
    Linear,
    MultiHeadSelfAttention,
)
from .ops import (
    cross_entropy,
    gelu,
    gelu_grad,
    layer_norm,
    matmul,
    scaled_dot_attention,
    softmax_rows,
)

__all__ = [
    "EncoderBlock",
    "FeedForward",
    "Gelu",
    "Layer",
    "LayerNorm",
    "Linear",
    "MultiHeadSelfAttention",
    "cross_entropy",
    "gelu",
    "gelu_grad",
    "grad_check",
    "layer_norm",
    "matmul",
    "scaled_dot_attention",
    "softmax_rows",
    "sum_loss",
]
