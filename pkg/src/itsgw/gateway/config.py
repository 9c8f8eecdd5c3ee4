"""Gateway configuration: a flat key=value file mapped onto a frozen dataclass."""

from __future__ import annotations

import shlex
from dataclasses import dataclass, field, fields
from pathlib import Path

from ..core.errors import ItsgwError
from ..core.records import Modality

DEFAULT_QUEUE_CAPACITY = 1024
DEFAULT_WORKER_COUNT = 4
DEFAULT_BACKEND_TIMEOUT_MS = 10_000
DEFAULT_HTTP_BIND = "127.0.0.1:8321"


class InvalidConfig(ItsgwError):
    pass


@dataclass(frozen=True)
class GatewayConfig:
    """Operator-facing knobs for one gateway process."""

    queue_capacity: int = DEFAULT_QUEUE_CAPACITY
    worker_count: int = DEFAULT_WORKER_COUNT
    http_bind: str = DEFAULT_HTTP_BIND
    backend_command: str | None = None  # shell-style argv for a child process
    backend_endpoint: str | None = None  # host:port for a TCP backend
    backend_timeout_ms: int = DEFAULT_BACKEND_TIMEOUT_MS
    fallback_to_builtin: bool = True
    auto_deploy: bool = False
    job_log_path: str = "itsgw-jobs.ndjson"
    checkpoint_paths: dict[Modality, str] = field(default_factory=dict)
    label_schema_path: str | None = None
    latency_includes_queue_wait: bool = False

    def __post_init__(self) -> None:
        if self.queue_capacity < 1:
            raise InvalidConfig("queue_capacity must be at least 1")
        if self.worker_count < 1:
            raise InvalidConfig("worker_count must be at least 1")
        if self.backend_timeout_ms <= 0:
            raise InvalidConfig("backend_timeout_ms must be positive")
        if self.backend_command and self.backend_endpoint:
            raise InvalidConfig("configure backend_command or backend_endpoint, not both")

    @property
    def backend_argv(self) -> list[str] | None:
        if self.backend_command is None:
            return None
        return shlex.split(self.backend_command)

    @property
    def http_host_port(self) -> tuple[str, int]:
        host, _, port = self.http_bind.rpartition(":")
        if not host or not port.isdigit():
            raise InvalidConfig(f"http_bind must be host:port, got {self.http_bind!r}")
        return host, int(port)


_BOOL_WORDS = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}

_INT_KEYS = {"queue_capacity", "worker_count", "backend_timeout_ms"}
_BOOL_KEYS = {"fallback_to_builtin", "auto_deploy", "latency_includes_queue_wait"}
_STR_KEYS = {
    "http_bind",
    "backend_command",
    "backend_endpoint",
    "job_log_path",
    "label_schema_path",
}
_CHECKPOINT_PREFIX = "checkpoint_"


def parse_config(text: str) -> GatewayConfig:
    """Parse flat ``key=value`` lines; ``#`` starts a comment, blanks skipped.

    Checkpoint paths use one key per modality: ``checkpoint_time_series=...``.
    """
    values: dict[str, object] = {}
    checkpoints: dict[Modality, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InvalidConfig(f"line {lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in _INT_KEYS:
            try:
                values[key] = int(value)
            except ValueError:
                raise InvalidConfig(f"line {lineno}: {key} must be an integer") from None
        elif key in _BOOL_KEYS:
            if value.lower() not in _BOOL_WORDS:
                raise InvalidConfig(f"line {lineno}: {key} must be a boolean")
            values[key] = _BOOL_WORDS[value.lower()]
        elif key in _STR_KEYS:
            values[key] = value
        elif key.startswith(_CHECKPOINT_PREFIX):
            name = key[len(_CHECKPOINT_PREFIX):]
            try:
                checkpoints[Modality(name)] = value
            except ValueError:
                raise InvalidConfig(f"line {lineno}: unknown modality {name!r}") from None
        else:
            raise InvalidConfig(f"line {lineno}: unknown key {key!r}")
    if checkpoints:
        values["checkpoint_paths"] = checkpoints
    return GatewayConfig(**values)  # type: ignore[arg-type]


def load_config(path: str | Path) -> GatewayConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def dump_config(config: GatewayConfig) -> str:
    """Render a config back to the flat key=value format (round-trip aid)."""
    lines: list[str] = []
    for fld in fields(config):
        value = getattr(config, fld.name)
        if fld.name == "checkpoint_paths":
            for modality, path in sorted(value.items(), key=lambda kv: kv[0].value):
                lines.append(f"checkpoint_{modality.value}={path}")
            continue
        if value is None:
            continue
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{fld.name}={value}")
    return "\n".join(lines) + "\n"
