"""Deterministic tabular-to-text serialization.

The grammar is `<lowercase_field_name> is <value>` joined by " [SEP] ";
numeric values render with up to 6 significant digits and no trailing
zeros, so the same reading always tokenizes identically.
"""

from __future__ import annotations

from ..core.errors import SchemaMismatch
from ..core.records import RecordSchema, SensorRecord


class EmptySchema(SchemaMismatch):
    pass


def format_number(value: float) -> str:
    """Shortest rendering with at most 6 significant digits."""
    text = f"{value:.6g}"
    # %g keeps "42" for 42.0; nothing further to strip
    return text


def serialize_record(schema: RecordSchema, record: SensorRecord) -> str:
    if not schema:
        raise EmptySchema("cannot serialize against an empty schema")
    parts = []
    for fld, value in zip(schema, record.values):
        rendered = format_number(float(value)) if not isinstance(value, str) else value
        parts.append(f"{fld.name.lower()} is {rendered}")
    return " [SEP] ".join(parts)
