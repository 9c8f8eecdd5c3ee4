"""The transformer encoder classifier shared by text and audio paths.

Token mode embeds ids; feature mode projects spectrogram frames. Both
add learned position embeddings, run pre-norm blocks with the padding
mask, normalize, and classify from the position-0 state. The final
layer norm carries no learned parameters (gamma 1, beta 0 fixed), and
embeddings have no bias; the head does.

Checkpoint parameter order (also the params() iteration order):
embedding, pos_emb, then per block ln1.gamma, ln1.beta, attn.wq, attn.wk,
attn.wv, attn.wo, ln2.gamma, ln2.beta, ffn.lin1.w, ffn.lin1.b,
ffn.lin2.w, ffn.lin2.b, then head.w, head.b.
"""

from __future__ import annotations

import numpy as np

from ..core.errors import ShapeMismatch
from ..nn.layers import INIT_STD, EncoderBlock, LayerNorm, Linear, _prefixed
from ..text.tokenizer import EncodedText
from .config import EncoderConfig


class EncoderModel:
    def __init__(self, config: EncoderConfig):
        self.config = config
        rng = np.random.default_rng(config.seed)
        self.embedding = rng.normal(0.0, INIT_STD, size=(config.input_width, config.d_model))
        self.pos_emb = rng.normal(0.0, INIT_STD, size=(config.max_len, config.d_model))
        self.blocks = [
            EncoderBlock(config.d_model, config.n_heads, config.d_ff, rng)
            for _ in range(config.n_layers)
        ]
        self.final_norm = LayerNorm(config.d_model)  # parameterless: never trained
        self.head = Linear(config.d_model, config.n_classes, rng)
        self.d_embedding = np.zeros_like(self.embedding)
        self.d_pos_emb = np.zeros_like(self.pos_emb)
        self._cache: tuple | None = None

    # ------------------------------------------------------------ params

    def params(self) -> dict[str, np.ndarray]:
        out = {"embedding": self.embedding, "pos_emb": self.pos_emb}
        for i, block in enumerate(self.blocks):
            out.update(_prefixed(block.params(), f"block{i}"))
        out.update(_prefixed(self.head.params(), "head"))
        return out

    def grads(self) -> dict[str, np.ndarray]:
        out = {"embedding": self.d_embedding, "pos_emb": self.d_pos_emb}
        for i, block in enumerate(self.blocks):
            out.update(_prefixed(block.grads(), f"block{i}"))
        out.update(_prefixed(self.head.grads(), "head"))
        return out

    def param_count(self) -> int:
        return sum(p.size for p in self.params().values())

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(p)) for p in self.params().values())

    # ------------------------------------------------------------ forward

    def forward(self, inputs: tuple) -> np.ndarray:
        """(ids, mask) in token mode, (features, mask) in feature mode;
        returns 1 x n_classes logits."""
        raw, mask = inputs
        mask = np.asarray(mask, dtype=bool)
        if self.config.mode == "token_input":
            ids = np.asarray(raw, dtype=np.int64)
            if ids.shape != (self.config.max_len,):
                raise ShapeMismatch(
                    f"token input must have length {self.config.max_len}, got {ids.shape}"
                )
            if ids.min() < 0 or ids.max() >= self.config.vocab_size:
                raise ShapeMismatch(f"id outside vocab of {self.config.vocab_size}")
            x = self.embedding[ids] + self.pos_emb
        else:
            features = np.asarray(raw, dtype=np.float64)
            if features.ndim != 2 or features.shape[1] != self.config.feature_dim:
                raise ShapeMismatch(
                    f"features must be T x {self.config.feature_dim}, got {features.shape}"
                )
            if features.shape[0] > self.config.max_len:
                raise ShapeMismatch(
                    f"T={features.shape[0]} exceeds max_len {self.config.max_len}"
                )
            x = features @ self.embedding + self.pos_emb[: features.shape[0]]
        if mask.shape != (x.shape[0],):
            raise ShapeMismatch(f"mask must have length {x.shape[0]}, got {mask.shape}")
        if not mask[0]:
            raise ShapeMismatch("position 0 must be unmasked: it feeds the head")
        for block in self.blocks:
            block.mask = mask
            x = block.forward(x)
        normed = self.final_norm.forward(x)
        logits = self.head.forward(normed[0:1])
        self._cache = (raw, x.shape[0])
        return logits

    def backward(self, dlogits: np.ndarray) -> None:
        if self._cache is None:
            raise ShapeMismatch("backward before forward")
        raw, seq_len = self._cache
        dx0 = self.head.backward(dlogits)
        dnormed = np.zeros((seq_len, self.config.d_model))
        dnormed[0] = dx0[0]
        dx = self.final_norm.backward(dnormed)
        for block in reversed(self.blocks):
            dx = block.backward(dx)
        self.d_embedding = np.zeros_like(self.embedding)
        self.d_pos_emb = np.zeros_like(self.pos_emb)
        if self.config.mode == "token_input":
            ids = np.asarray(raw, dtype=np.int64)
            np.add.at(self.d_embedding, ids, dx)
            self.d_pos_emb += dx
        else:
            features = np.asarray(raw, dtype=np.float64)
            self.d_embedding = features.T @ dx
            self.d_pos_emb[:seq_len] = dx


def init_model(config: EncoderConfig) -> EncoderModel:
    """Weights ~ Normal(0, 0.02), biases and layer-norm beta 0, gamma 1,
    all drawn deterministically from config.seed."""
    return EncoderModel(config)


def forward_classify(model: EncoderModel, inputs) -> np.ndarray:
    """Logits vector (length n_classes) for one encoded input.

    Accepts EncodedText (token mode), a (features, mask) pair, or any
    object with .frames (feature mode, every frame unmasked).
    """
    if isinstance(inputs, EncodedText):
        pair = (inputs.ids, inputs.mask)
    elif isinstance(inputs, tuple):
        pair = inputs
    elif hasattr(inputs, "frames"):
        pair = (inputs.frames, np.ones(inputs.frames.shape[0], dtype=bool))
    else:
        raise ShapeMismatch(f"cannot classify {type(inputs).__name__}")
    return model.forward(pair)[0]
