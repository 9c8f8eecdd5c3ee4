"""Append-only NDJSON job log: one line per state change, replayable after a crash.

Durability contract: terminal transitions are fsynced; transient ones are only
flushed. A crash can therefore tear at most the final line, which replay
ignores; any malformed line before the final one means real corruption.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..core.errors import ItsgwError
from ..core.jobs import JobError, JobStatus
from ..core.records import Modality


class CorruptLog(ItsgwError):
    """A non-final log line is unreadable or breaks the job state machine."""


INTERRUPTED = JobError(code="interrupted", message="gateway stopped while job was running")

_EVENTS = {status.value for status in JobStatus}
_TERMINAL_EVENTS = {JobStatus.SUCCEEDED.value, JobStatus.FAILED.value}

# Which log event may follow which replayed status (None = job unseen so far).
_REPLAY_STEPS: dict[tuple[JobStatus | None, str], JobStatus] = {
    (None, JobStatus.QUEUED.value): JobStatus.QUEUED,
    (JobStatus.QUEUED, JobStatus.RUNNING.value): JobStatus.RUNNING,
    (JobStatus.RUNNING, JobStatus.SUCCEEDED.value): JobStatus.SUCCEEDED,
    (JobStatus.RUNNING, JobStatus.FAILED.value): JobStatus.FAILED,
    # Jobs that never ran may be failed directly (e.g. validation at dispatch).
    (JobStatus.QUEUED, JobStatus.FAILED.value): JobStatus.FAILED,
}


def payload_digest(payload: Any) -> str:
    """Stable short digest of a job payload for log correlation."""
    if payload is None:
        material = b"none"
    elif isinstance(payload, bytes):
        material = payload
    else:
        material = repr(payload).encode("utf-8", errors="replace")
    return hashlib.sha256(material).hexdigest()[:16]


def format_entry(
    job_id: str,
    event: str,
    *,
    modality: Modality | None = None,
    digest: str | None = None,
    mono_us: int | None = None,
    result: dict[str, Any] | None = None,
    error: dict[str, str] | None = None,
) -> str:
    """One log line: compact JSON, stable key order, wall-clock stamp."""
    entry: dict[str, Any] = {
        "job_id": job_id,
        "event": event,
        "ts_us": time.time_ns() // 1000,
    }
    if modality is not None:
        entry["modality"] = modality.value
    if digest is not None:
        entry["digest"] = digest
    if mono_us is not None:
        entry["mono_us"] = mono_us
    if result is not None:
        entry["result"] = result
    if error is not None:
        entry["error"] = error
    return json.dumps(entry, separators=(",", ":"), sort_keys=False)


class JobLog:
    """Single-writer append-only log; safe to share across worker threads."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._file = open(self.path, "ab")
        self._lock = threading.Lock()

    def append(self, line: str, *, durable: bool) -> None:
        data = line.encode("utf-8") + b"\n"
        with self._lock:
            self._file.write(data)
            self._file.flush()
            if durable:
                os.fsync(self._file.fileno())

    def close(self) -> None:
        with self._lock:
            if not self._file.closed:
                self._file.flush()
                os.fsync(self._file.fileno())
                self._file.close()

    def __enter__(self) -> "JobLog":
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()


@dataclass
class ReplayedJob:
    """Final view of one job reconstructed purely from log lines."""

    job_id: str
    modality: Modality | None = None
    status: JobStatus = JobStatus.QUEUED
    digest: str | None = None
    submitted_at: int | None = None
    started_at: int | None = None
    finished_at: int | None = None
    result: dict[str, Any] | None = None
    error: dict[str, str] | None = None
    events: list[str] = field(default_factory=list)

    def to_row(self) -> dict[str, Any]:
        """Order-free comparison key used by the crash-replay oracle tests."""
        return {
            "job_id": self.job_id,
            "status": self.status.value,
            "result": self.result,
            "error": self.error,
        }


def _parse_line(raw: str) -> dict[str, Any] | None:
    """Parsed entry, or None when the line is not a well-formed entry."""
    try:
        entry = json.loads(raw)
    except json.JSONDecodeError:
        return None
    if not isinstance(entry, dict):
        return None
    if not isinstance(entry.get("job_id"), str) or entry.get("event") not in _EVENTS:
        return None
    return entry


def replay_log(path: str | Path) -> dict[str, ReplayedJob]:
    """Rebuild the job table from the log.

    A torn (unparseable) final line is skipped. Jobs left running at the end
    of the log were in flight when the process died and are marked
    failed{code: interrupted}. Any earlier unreadable or out-of-order line
    raises CorruptLog.
    """
    text = Path(path).read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()  # trailing newline after a complete final line
    table: dict[str, ReplayedJob] = {}
    last = len(lines) - 1
    for index, raw in enumerate(lines):
        if not raw.strip():
            if index == last:
                continue
            raise CorruptLog(f"line {index + 1}: blank line inside log")
        entry = _parse_line(raw)
        if entry is None:
            if index == last:
                continue  # torn write at crash; only the final line may tear
            raise CorruptLog(f"line {index + 1}: unreadable entry")
        job_id = entry["job_id"]
        event = entry["event"]
        job = table.get(job_id)
        step = _REPLAY_STEPS.get((job.status if job else None, event))
        if step is None:
            raise CorruptLog(
                f"line {index + 1}: event {event!r} illegal for job {job_id!r}"
            )
        if job is None:
            job = ReplayedJob(job_id=job_id)
            table[job_id] = job
        job.status = step
        job.events.append(event)
        mono = entry.get("mono_us")
        if event == JobStatus.QUEUED.value:
            job.digest = entry.get("digest")
            job.submitted_at = mono
            raw_modality = entry.get("modality")
            if raw_modality is not None:
                try:
                    job.modality = Modality(raw_modality)
                except ValueError:
                    raise CorruptLog(
                        f"line {index + 1}: unknown modality {raw_modality!r}"
                    ) from None
        elif event == JobStatus.RUNNING.value:
            job.started_at = mono
        else:
            job.finished_at = mono
            job.result = entry.get("result")
            job.error = entry.get("error")
    for job in table.values():
        if job.status is JobStatus.RUNNING:
            job.status = JobStatus.FAILED
            job.error = INTERRUPTED.to_dict()
    return table
