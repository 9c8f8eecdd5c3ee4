"""The three modality payload types and record validation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import LabelOutOfRange, NonFiniteValue, SchemaMismatch


class Modality(str, Enum):
    TIME_SERIES = "time_series"
    AUDIO = "audio"
    VIDEO = "video"


class FieldKind(str, Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class RecordField:
    name: str
    kind: FieldKind


RecordSchema = tuple[RecordField, ...]


def record_schema(*fields: tuple[str, str | FieldKind]) -> RecordSchema:
    """Build a schema from (name, kind) pairs."""
    return tuple(RecordField(name, FieldKind(kind)) for name, kind in fields)


@dataclass(frozen=True)
class SensorRecord:
    """One tabular observation: per-field numeric or categorical values."""

    values: tuple[float | str, ...]
    label: int | None = None


@dataclass(frozen=True)
class AudioClip:
    """Mono PCM16 samples at a fixed 16 kHz rate."""

    samples: tuple[int, ...]
    sample_rate_hz: int = 16000
    label: int | None = None


@dataclass(frozen=True)
class Frame:
    """Grayscale image, row-major intensity bytes."""

    width: int
    height: int
    pixels: bytes

    def __post_init__(self) -> None:
        if len(self.pixels) != self.width * self.height:
            raise SchemaMismatch(
                f"frame has {len(self.pixels)} bytes, expected {self.width * self.height}"
            )


@dataclass(frozen=True)
class FrameSequence:
    frames: tuple[Frame, ...]
    source_id: str = ""

    def __post_init__(self) -> None:
        dims = {(f.width, f.height) for f in self.frames}
        if len(dims) > 1:
            raise SchemaMismatch(f"frames disagree on dimensions: {sorted(dims)}")
        for w, h in dims:
            if w < 8 or h < 8:
                raise SchemaMismatch(f"frames must be at least 8x8, got {w}x{h}")


ModalityInput = SensorRecord | AudioClip | FrameSequence


def validate_record(
    schema: RecordSchema, record: SensorRecord, n_classes: int | None = None
) -> None:
    """Check a record against its field schema; raise on the first violation.

    ``n_classes``, when given, bounds the optional label.
    """
    if len(record.values) != len(schema):
        raise SchemaMismatch(
            f"record has {len(record.values)} values for {len(schema)} fields"
        )
    for fld, value in zip(schema, record.values):
        if fld.kind is FieldKind.NUMERIC:
            if isinstance(value, str) or not isinstance(value, (int, float)):
                raise SchemaMismatch(f"field {fld.name!r} expects a numeric value")
            if not math.isfinite(value):
                raise NonFiniteValue(f"field {fld.name!r} is {value}")
        else:
            if not isinstance(value, str):
                raise SchemaMismatch(f"field {fld.name!r} expects a categorical token")
    if record.label is not None:
        if record.label < 0 or (n_classes is not None and record.label >= n_classes):
            raise LabelOutOfRange(f"label {record.label} outside 0..{(n_classes or 0) - 1}")


def validate_audio_clip(clip: AudioClip) -> None:
    if clip.sample_rate_hz != 16000:
        raise SchemaMismatch(f"expected 16000 Hz, got {clip.sample_rate_hz}")
    if len(clip.samples) < 1:
        raise SchemaMismatch("clip is empty")
