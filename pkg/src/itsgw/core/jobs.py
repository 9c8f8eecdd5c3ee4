"""Job envelopes and the queued -> running -> terminal state machine."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .errors import IllegalTransition
from .records import Modality


class JobStatus(str, Enum):
    QUEUED = "queued"
    RUNNING = "running"
    SUCCEEDED = "succeeded"
    FAILED = "failed"


class JobEvent(str, Enum):
    START = "start"
    FINISH_OK = "finish_ok"
    FINISH_ERR = "finish_err"


TERMINAL = frozenset({JobStatus.SUCCEEDED, JobStatus.FAILED})

_TRANSITIONS = {
    (JobStatus.QUEUED, JobEvent.START): JobStatus.RUNNING,
    (JobStatus.RUNNING, JobEvent.FINISH_OK): JobStatus.SUCCEEDED,
    (JobStatus.RUNNING, JobEvent.FINISH_ERR): JobStatus.FAILED,
}


def job_transition(current: JobStatus, event: JobEvent) -> JobStatus:
    """Advance the lifecycle; terminal states never move again."""
    nxt = _TRANSITIONS.get((current, event))
    if nxt is None:
        raise IllegalTransition(f"{current.value} + {event.value}")
    return nxt


def mono_us() -> int:
    """Monotonic microseconds; the clock all latency math is done in."""
    return time.monotonic_ns() // 1000


@dataclass
class JobError:
    code: str
    message: str

    def to_dict(self) -> dict[str, str]:
        return {"code": self.code, "message": self.message}


@dataclass
class JobEnvelope:
    """One unit of asynchronous work with its full lifecycle record.

    Exactly one of result/error is set once terminal; timestamps are
    monotonic microseconds (wall-clock lives in the job log only).
    """

    job_id: str
    modality: Modality
    payload: Any
    params: dict[str, Any] = field(default_factory=dict)
    status: JobStatus = JobStatus.QUEUED
    submitted_at: int = 0
    started_at: int | None = None
    finished_at: int | None = None
    result: dict[str, Any] | None = None
    error: JobError | None = None

    def apply(self, event: JobEvent, *, now: int | None = None,
              result: dict[str, Any] | None = None,
              error: JobError | None = None) -> None:
        """Apply one lifecycle event, stamping the matching timestamp."""
        self.status = job_transition(self.status, event)
        now = mono_us() if now is None else now
        if event is JobEvent.START:
            self.started_at = now
        else:
            self.finished_at = now
            self.result = result
            self.error = error

    @property
    def terminal(self) -> bool:
        return self.status in TERMINAL

    def snapshot(self) -> dict[str, Any]:
        """Immutable view for polling; payloads never leave the gateway."""
        snap: dict[str, Any] = {
            "job_id": self.job_id,
            "modality": self.modality.value,
            "status": self.status.value,
            "submitted_at": self.submitted_at,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
        }
        if self.result is not None:
            snap["result"] = self.result
        if self.error is not None:
            snap["error"] = self.error.to_dict()
        return snap
