from .errors import (
    IllegalTransition,
    ItsgwError,
    LabelOutOfRange,
    NonFiniteValue,
    SchemaMismatch,
    ShapeMismatch,
    ValidationFailed,
)
from .jobs import (
    TERMINAL,
    JobEnvelope,
    JobError,
    JobEvent,
    JobStatus,
    job_transition,
    mono_us,
)
from .labels import (
    CAPTIONING_SCHEMA,
    DEFAULT_CLASSIFICATION_SCHEMA,
    LabelSchema,
    TaskKind,
    load_label_schema,
    save_label_schema,
)
from .metrics import REPORT_HEADER, MetricsRow, format_gop, metrics_row_format
from .records import (
    AudioClip,
    FieldKind,
    Frame,
    FrameSequence,
    Modality,
    ModalityInput,
    RecordField,
    RecordSchema,
    SensorRecord,
    record_schema,
    validate_audio_clip,
    validate_record,
)

__all__ = [
    "AudioClip",
    "CAPTIONING_SCHEMA",
    "DEFAULT_CLASSIFICATION_SCHEMA",
    "FieldKind",
    "Frame",
    "FrameSequence",
    "IllegalTransition",
    "ItsgwError",
    "JobEnvelope",
    "JobError",
    "JobEvent",
    "JobStatus",
    "LabelOutOfRange",
    "LabelSchema",
    "MetricsRow",
    "Modality",
    "ModalityInput",
    "NonFiniteValue",
    "RecordField",
    "RecordSchema",
    "REPORT_HEADER",
    "SchemaMismatch",
    "SensorRecord",
    "ShapeMismatch",
    "TaskKind",
    "TERMINAL",
    "ValidationFailed",
    "format_gop",
    "job_transition",
    "load_label_schema",
    "metrics_row_format",
    "mono_us",
    "record_schema",
    "save_label_schema",
    "validate_audio_clip",
    "validate_record",
]
