"""Checkpoint persistence: magic "ITSM1", config lines, raw f64 blobs.

Layout:
    ITSM1\n
    key=value\n        (config fields, fixed key order below)
    \n                 (blank line ends the header)
    <parameters>       (little-endian f64, concatenated in the model's
                        documented parameter order, shapes implied by
                        the config)

Round trips are byte-identical: floats are stored raw, never printed.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..core.errors import ItsgwError
from .config import EncoderConfig
from .model import EncoderModel

MAGIC = b"ITSM1\n"
_CONFIG_KEYS = (
    "n_layers",
    "n_heads",
    "d_model",
    "d_ff",
    "max_len",
    "n_classes",
    "vocab_size",
    "feature_dim",
    "seed",
)


class MalformedCheckpoint(ItsgwError):
    pass


def save_checkpoint(model: EncoderModel, path: str | Path) -> None:
    lines = []
    for key in _CONFIG_KEYS:
        value = getattr(model.config, key)
        if value is not None:
            lines.append(f"{key}={value}\n")
    payload = b"".join(p.astype("<f8").tobytes() for p in model.params().values())
    Path(path).write_bytes(MAGIC + "".join(lines).encode() + b"\n" + payload)


def load_checkpoint(path: str | Path) -> EncoderModel:
    raw = Path(path).read_bytes()
    if not raw.startswith(MAGIC):
        raise MalformedCheckpoint("bad magic")
    header_end = raw.find(b"\n\n", len(MAGIC) - 1)
    if header_end < 0:
        raise MalformedCheckpoint("missing header terminator")
    fields: dict[str, int] = {}
    for line in raw[len(MAGIC) : header_end].decode().splitlines():
        key, _, value = line.partition("=")
        if key not in _CONFIG_KEYS or not value.lstrip("-").isdigit():
            raise MalformedCheckpoint(f"bad config line {line!r}")
        fields[key] = int(value)
    try:
        config = EncoderConfig(**fields)
    except TypeError as exc:
        raise MalformedCheckpoint(f"incomplete config: {exc}") from exc
    model = EncoderModel(config)
    blob = raw[header_end + 2 :]
    expected = sum(p.size for p in model.params().values()) * 8
    if len(blob) != expected:
        raise MalformedCheckpoint(f"payload is {len(blob)} bytes, expected {expected}")
    offset = 0
    for param in model.params().values():
        size = param.size * 8
        values = np.frombuffer(blob, dtype="<f8", count=param.size, offset=offset)
        np.copyto(param, values.reshape(param.shape))
        offset += size
    return model
