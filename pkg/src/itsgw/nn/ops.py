"""Dense f64 tensor ops: matmul, softmax, layer norm, GELU, attention, CE.

Everything operates on 2-D numpy float64 arrays (row-major). Shape errors
raise ShapeMismatch; numerics are kept stable with per-row max subtraction.
"""

from __future__ import annotations

import numpy as np

from ..core.errors import LabelOutOfRange, ShapeMismatch

# tanh-approximation GELU constants
GELU_C = 0.7978845608  # sqrt(2/pi)
GELU_A = 0.044715


def _check_2d(name: str, x: np.ndarray) -> None:
    if x.ndim != 2:
        raise ShapeMismatch(f"{name} must be 2-D, got shape {x.shape}")


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _check_2d("a", a)
    _check_2d("b", b)
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def softmax_rows(x: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction; tolerates -inf entries."""
    _check_2d("x", x)
    shifted = x - np.max(x, axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=1, keepdims=True)


def layer_norm(
    x: np.ndarray, gamma: np.ndarray, beta: np.ndarray, eps: float = 1e-5
) -> np.ndarray:
    """Per-row (x - mean) / sqrt(pop_var + eps) * gamma + beta."""
    _check_2d("x", x)
    if gamma.shape != (x.shape[1],) or beta.shape != (x.shape[1],):
        raise ShapeMismatch(
            f"gamma/beta must have length {x.shape[1]}, got {gamma.shape}/{beta.shape}"
        )
    mean = x.mean(axis=1, keepdims=True)
    var = x.var(axis=1, keepdims=True)
    return (x - mean) / np.sqrt(var + eps) * gamma + beta


def gelu(x: np.ndarray) -> np.ndarray:
    return 0.5 * x * (1.0 + np.tanh(GELU_C * (x + GELU_A * x**3)))


def gelu_grad(x: np.ndarray) -> np.ndarray:
    """d gelu / dx for the tanh approximation."""
    u = GELU_C * (x + GELU_A * x**3)
    t = np.tanh(u)
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t**2) * GELU_C * (1.0 + 3.0 * GELU_A * x**2)


def cross_entropy(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean negative log softmax likelihood and its logits gradient.

    Gradient is (softmax - one_hot) / n_rows.
    """
    _check_2d("logits", logits)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (logits.shape[0],):
        raise LabelOutOfRange(
            f"need {logits.shape[0]} labels, got shape {labels.shape}"
        )
    if labels.size and (labels.min() < 0 or labels.max() >= logits.shape[1]):
        raise LabelOutOfRange(f"labels outside 0..{logits.shape[1] - 1}")
    rows = logits.shape[0]
    m = np.max(logits, axis=1, keepdims=True)
    lse = m[:, 0] + np.log(np.sum(np.exp(logits - m), axis=1))
    loss = float(np.mean(lse - logits[np.arange(rows), labels]))
    grad = softmax_rows(logits)
    grad[np.arange(rows), labels] -= 1.0
    grad /= rows
    return loss, grad


def scaled_dot_attention(
    q: np.ndarray,
    k: np.ndarray,
    v: np.ndarray,
    mask: np.ndarray | None = None,
) -> np.ndarray:
    """softmax(Q K^T / sqrt(d_k)) V with masked key positions scored -inf.

    ``mask`` is a boolean vector over key positions; True means attend.
    """
    _check_2d("q", q)
    _check_2d("k", k)
    _check_2d("v", v)
    if q.shape[1] != k.shape[1]:
        raise ShapeMismatch(f"q/k width mismatch: {q.shape} vs {k.shape}")
    if k.shape[0] != v.shape[0]:
        raise ShapeMismatch(f"k/v length mismatch: {k.shape} vs {v.shape}")
    scores = q @ k.T / np.sqrt(q.shape[1])
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (k.shape[0],):
            raise ShapeMismatch(f"mask must have length {k.shape[0]}, got {mask.shape}")
        scores = np.where(mask[None, :], scores, -np.inf)
    return softmax_rows(scores) @ v
