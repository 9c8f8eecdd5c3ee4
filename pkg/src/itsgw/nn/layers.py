"""Differentiable layers with hand-derived backward passes.

Each layer caches what its backward needs during forward, overwrites its
gradient buffers on backward, and returns the gradient w.r.t. its input.
Instances are single-threaded during forward/backward; parameters may be
shared read-only once training is done.
"""

from __future__ import annotations

import numpy as np

from ..core.errors import ShapeMismatch
from .ops import gelu, gelu_grad, softmax_rows

INIT_STD = 0.02


class Layer:
    """Forward/backward pair with named parameters and gradients."""

    def params(self) -> dict[str, np.ndarray]:
        return {}

    def grads(self) -> dict[str, np.ndarray]:
        return {}

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dout: np.ndarray) -> np.ndarray:
        raise NotImplementedError


def _prefixed(d: dict[str, np.ndarray], prefix: str) -> dict[str, np.ndarray]:
    return {f"{prefix}.{k}": v for k, v in d.items()}


class Linear(Layer):
    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator):
        self.w = rng.normal(0.0, INIT_STD, size=(n_in, n_out))
        self.b = np.zeros(n_out)
        self.dw = np.zeros_like(self.w)
        self.db = np.zeros_like(self.b)
        self._x: np.ndarray | None = None

    def params(self):
        return {"w": self.w, "b": self.b}

    def grads(self):
        return {"w": self.dw, "b": self.db}

    def forward(self, x):
        if x.shape[1] != self.w.shape[0]:
            raise ShapeMismatch(f"linear expects width {self.w.shape[0]}, got {x.shape}")
        self._x = x
        return x @ self.w + self.b

    def backward(self, dout):
        if self._x is None:
            raise ShapeMismatch("backward before forward")
        self.dw = self._x.T @ dout
        self.db = dout.sum(axis=0)
        return dout @ self.w.T


class LayerNorm(Layer):
    def __init__(self, dim: int, eps: float = 1e-5):
        self.gamma = np.ones(dim)
        self.beta = np.zeros(dim)
        self.eps = eps
        self.dgamma = np.zeros_like(self.gamma)
        self.dbeta = np.zeros_like(self.beta)
        self._xhat: np.ndarray | None = None
        self._inv_std: np.ndarray | None = None

    def params(self):
        return {"gamma": self.gamma, "beta": self.beta}

    def grads(self):
        return {"gamma": self.dgamma, "beta": self.dbeta}

    def forward(self, x):
        if x.shape[1] != self.gamma.shape[0]:
            raise ShapeMismatch(f"layer norm dim {self.gamma.shape[0]}, got {x.shape}")
        mean = x.mean(axis=1, keepdims=True)
        var = x.var(axis=1, keepdims=True)
        self._inv_std = 1.0 / np.sqrt(var + self.eps)
        self._xhat = (x - mean) * self._inv_std
        return self._xhat * self.gamma + self.beta

    def backward(self, dout):
        if self._xhat is None:
            raise ShapeMismatch("backward before forward")
        xhat, inv_std = self._xhat, self._inv_std
        self.dgamma = (dout * xhat).sum(axis=0)
        self.dbeta = dout.sum(axis=0)
        dxhat = dout * self.gamma
        # Row-wise: dx = inv_std * (dxhat - mean(dxhat) - xhat * mean(dxhat * xhat))
        m1 = dxhat.mean(axis=1, keepdims=True)
        m2 = (dxhat * xhat).mean(axis=1, keepdims=True)
        return inv_std * (dxhat - m1 - xhat * m2)


class Gelu(Layer):
    def __init__(self):
        self._x: np.ndarray | None = None

    def forward(self, x):
        self._x = x
        return gelu(x)

    def backward(self, dout):
        if self._x is None:
            raise ShapeMismatch("backward before forward")
        return dout * gelu_grad(self._x)


class FeedForward(Layer):
    """Linear -> GELU -> Linear position-wise network."""

    def __init__(self, d_model: int, d_ff: int, rng: np.random.Generator):
        self.lin1 = Linear(d_model, d_ff, rng)
        self.act = Gelu()
        self.lin2 = Linear(d_ff, d_model, rng)

    def params(self):
        return {**_prefixed(self.lin1.params(), "lin1"),
                **_prefixed(self.lin2.params(), "lin2")}

    def grads(self):
        return {**_prefixed(self.lin1.grads(), "lin1"),
                **_prefixed(self.lin2.grads(), "lin2")}

    def forward(self, x):
        return self.lin2.forward(self.act.forward(self.lin1.forward(x)))

    def backward(self, dout):
        return self.lin1.backward(self.act.backward(self.lin2.backward(dout)))


class MultiHeadSelfAttention(Layer):
    """Masked multi-head self-attention over one sequence (S x d_model).

    Projections are bias-free: a key bias shifts every score in a row by
    the same amount, which softmax cancels, so it could never train.
    Set ``mask`` (boolean per position, True = attend) before forward;
    None means every position is valid. Masked key positions get -inf
    scores, so their values can never leak into unmasked outputs.
    """

    def __init__(self, d_model: int, n_heads: int, rng: np.random.Generator):
        if d_model % n_heads:
            raise ShapeMismatch(f"d_model {d_model} not divisible by {n_heads} heads")
        self.n_heads = n_heads
        self.d_k = d_model // n_heads
        self.wq = rng.normal(0.0, INIT_STD, size=(d_model, d_model))
        self.wk = rng.normal(0.0, INIT_STD, size=(d_model, d_model))
        self.wv = rng.normal(0.0, INIT_STD, size=(d_model, d_model))
        self.wo = rng.normal(0.0, INIT_STD, size=(d_model, d_model))
        self.dwq = np.zeros_like(self.wq)
        self.dwk = np.zeros_like(self.wk)
        self.dwv = np.zeros_like(self.wv)
        self.dwo = np.zeros_like(self.wo)
        self.mask: np.ndarray | None = None
        self._cache: tuple | None = None

    def params(self):
        return {"wq": self.wq, "wk": self.wk, "wv": self.wv, "wo": self.wo}

    def grads(self):
        return {"wq": self.dwq, "wk": self.dwk, "wv": self.dwv, "wo": self.dwo}

    def _split(self, x: np.ndarray) -> list[np.ndarray]:
        return [x[:, h * self.d_k:(h + 1) * self.d_k] for h in range(self.n_heads)]

    def forward(self, x):
        seq = x.shape[0]
        if x.shape[1] != self.wq.shape[0]:
            raise ShapeMismatch(f"attention expects width {self.wq.shape[0]}, got {x.shape}")
        q, k, v = x @ self.wq, x @ self.wk, x @ self.wv
        mask = self.mask
        if mask is not None:
            mask = np.asarray(mask, dtype=bool)
            if mask.shape != (seq,):
                raise ShapeMismatch(f"mask must have length {seq}, got {mask.shape}")
        heads, weights = [], []
        scale = 1.0 / np.sqrt(self.d_k)
        for qh, kh, vh in zip(self._split(q), self._split(k), self._split(v)):
            scores = qh @ kh.T * scale
            if mask is not None:
                scores = np.where(mask[None, :], scores, -np.inf)
            a = softmax_rows(scores)
            weights.append(a)
            heads.append(a @ vh)
        concat = np.concatenate(heads, axis=1)
        self._cache = (x, q, k, v, weights, concat)
        return concat @ self.wo

    def backward(self, dout):
        if self._cache is None:
            raise ShapeMismatch("backward before forward")
        x, q, k, v, weights, concat = self._cache
        self.dwo = concat.T @ dout
        d_concat = dout @ self.wo.T
        scale = 1.0 / np.sqrt(self.d_k)
        dq = np.empty_like(q)
        dk = np.empty_like(k)
        dv = np.empty_like(v)
        for h, (qh, kh, vh, a) in enumerate(
            zip(self._split(q), self._split(k), self._split(v), weights)
        ):
            sl = slice(h * self.d_k, (h + 1) * self.d_k)
            d_oh = d_concat[:, sl]
            da = d_oh @ vh.T
            dv[:, sl] = a.T @ d_oh
            # softmax backward; masked columns have a == 0, so ds == 0 there
            ds = a * (da - np.sum(da * a, axis=1, keepdims=True))
            dq[:, sl] = ds @ kh * scale
            dk[:, sl] = ds.T @ qh * scale
        self.dwq = x.T @ dq
        self.dwk = x.T @ dk
        self.dwv = x.T @ dv
        return dq @ self.wq.T + dk @ self.wk.T + dv @ self.wv.T


class EncoderBlock(Layer):
    """Pre-norm transformer block: x + Attn(LN(x)), then + FFN(LN(.))."""

    def __init__(self, d_model: int, n_heads: int, d_ff: int, rng: np.random.Generator):
        self.ln1 = LayerNorm(d_model)
        self.attn = MultiHeadSelfAttention(d_model, n_heads, rng)
        self.ln2 = LayerNorm(d_model)
        self.ffn = FeedForward(d_model, d_ff, rng)

    @property
    def mask(self):
        return self.attn.mask

    @mask.setter
    def mask(self, value):
        self.attn.mask = value

    def params(self):
        return {**_prefixed(self.ln1.params(), "ln1"),
                **_prefixed(self.attn.params(), "attn"),
                **_prefixed(self.ln2.params(), "ln2"),
                **_prefixed(self.ffn.params(), "ffn")}

    def grads(self):
        return {**_prefixed(self.ln1.grads(), "ln1"),
                **_prefixed(self.attn.grads(), "attn"),
                **_prefixed(self.ln2.grads(), "ln2"),
                **_prefixed(self.ffn.grads(), "ffn")}

    def forward(self, x):
        r1 = x + self.attn.forward(self.ln1.forward(x))
        return r1 + self.ffn.forward(self.ln2.forward(r1))

    def backward(self, dout):
        dr1 = dout + self.ln2.backward(self.ffn.backward(dout))
        return dr1 + self.ln1.backward(self.attn.backward(dr1))
