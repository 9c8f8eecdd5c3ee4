"""Label schemas: the class vocabulary shared by every modality."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import SchemaMismatch


class TaskKind(str, Enum):
    CLASSIFICATION = "classification"
    CAPTIONING = "captioning"


@dataclass(frozen=True)
class LabelSchema:
    """Ordered class names plus the task they belong to.

    Classification schemas carry >= 2 unique class names; captioning
    schemas carry none.
    """

    class_names: tuple[str, ...]
    task_kind: TaskKind = TaskKind.CLASSIFICATION

    def __post_init__(self) -> None:
        names = tuple(self.class_names)
        object.__setattr__(self, "class_names", names)
        if any(not n for n in names):
            raise SchemaMismatch("class names must be non-empty")
        if len(set(names)) != len(names):
            raise SchemaMismatch("class names must be unique")
        if self.task_kind is TaskKind.CLASSIFICATION and len(names) < 2:
            raise SchemaMismatch("classification needs at least 2 classes")
        if self.task_kind is TaskKind.CAPTIONING and names:
            raise SchemaMismatch("captioning schemas carry no classes")

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @property
    def task_name(self) -> str:
        return "Classification" if self.task_kind is TaskKind.CLASSIFICATION else "Captioning"


# Class sets are deployment configuration, not a property of any dataset;
# this is the out-of-the-box demo set.
DEFAULT_CLASSIFICATION_SCHEMA = LabelSchema(
    class_names=("normal", "warning", "fault"),
    task_kind=TaskKind.CLASSIFICATION,
)

CAPTIONING_SCHEMA = LabelSchema(class_names=(), task_kind=TaskKind.CAPTIONING)


def load_label_schema(path: str | Path) -> LabelSchema:
    """Read a label schema from a JSON file {task_kind, class_names}."""
    doc = json.loads(Path(path).read_text())
    return LabelSchema(
        class_names=tuple(doc.get("class_names", ())),
        task_kind=TaskKind(doc.get("task_kind", "classification")),
    )


def save_label_schema(schema: LabelSchema, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(
            {"task_kind": schema.task_kind.value, "class_names": list(schema.class_names)},
            indent=2,
        )
        + "\n"
    )
