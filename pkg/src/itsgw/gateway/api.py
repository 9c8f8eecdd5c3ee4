"""HTTP surface: submit, poll, metrics, health.

Thin adapter over a running Gateway; all request/response bodies are JSON.
Payloads arrive inline (base64 for binary formats) or as server-side file
paths for operator workflows.
"""

from __future__ import annotations

import base64
import binascii
import dataclasses
from typing import Any, Literal

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from ..core.errors import ItsgwError, ValidationFailed
from ..core.metrics import REPORT_HEADER, metrics_row_format
from ..core.records import (
    AudioClip,
    FrameSequence,
    ModalityInput,
    SensorRecord,
)
from ..visual.pgm import load_frame_sequence, read_pgm
from .runtime import Gateway, NotFound, QueueFull

ModalityName = Literal["time_series", "audio", "video"]


class JobSubmission(BaseModel):
    modality: ModalityName
    payload: dict[str, Any]
    params: dict[str, Any] = Field(default_factory=dict)


class JobAccepted(BaseModel):
    job_id: str


class HealthResponse(BaseModel):
    status: str
    workers: int
    queue_depth: int


class MetricsRowModel(BaseModel):
    modality: str
    accuracy_pct: float | None
    mac_gop: float
    task: str
    latency_ms: float
    formatted: str


class MetricsResponse(BaseModel):
    header: str
    rows: list[MetricsRowModel]


def _decode_payload(modality: ModalityName, payload: dict[str, Any]) -> ModalityInput:
    """Raise ValidationFailed for anything that cannot become a modality input."""
    try:
        if modality == "time_series":
            values = payload["values"]
            if not isinstance(values, list) or not values:
                raise ValidationFailed("values must be a non-empty list")
            return SensorRecord(values=tuple(values), label=payload.get("label"))
        if modality == "audio":
            label = payload.get("label")
            if "wav_b64" in payload:
                from ..audio.wav import load_wav

                clip = load_wav(base64.b64decode(payload["wav_b64"], validate=True))
            elif "wav_path" in payload:
                from ..audio.wav import load_wav

                with open(payload["wav_path"], "rb") as fh:
                    clip = load_wav(fh.read())
            elif "samples" in payload:
                clip = AudioClip(
                    samples=tuple(payload["samples"]),
                    sample_rate_hz=int(payload.get("sample_rate_hz", 16000)),
                )
            else:
                raise ValidationFailed("audio payload needs wav_b64, wav_path, or samples")
            if label is not None:
                clip = dataclasses.replace(clip, label=int(label))
            return clip
        if "frames_dir" in payload:
            return load_frame_sequence(payload["frames_dir"])
        if "frames_pgm_b64" in payload:
            frames = tuple(
                read_pgm(base64.b64decode(item, validate=True))
                for item in payload["frames_pgm_b64"]
            )
            return FrameSequence(frames=frames, source_id=str(payload.get("source_id", "")))
        raise ValidationFailed("video payload needs frames_dir or frames_pgm_b64")
    except ValidationFailed:
        raise
    except (ItsgwError, KeyError, TypeError, ValueError, OSError, binascii.Error) as exc:
        raise ValidationFailed(f"{type(exc).__name__}: {exc}") from exc


def create_app(gateway: Gateway) -> FastAPI:
    app = FastAPI(title="itsgw", docs_url=None, redoc_url=None)

    @app.post("/v1/jobs", status_code=202, response_model=JobAccepted)
    def submit(submission: JobSubmission) -> Any:
        try:
            payload = _decode_payload(submission.modality, submission.payload)
            job_id = gateway.submit_job(payload, submission.params)
        except QueueFull as exc:
            return JSONResponse(
                status_code=429, content={"error": exc.code, "message": str(exc)}
            )
        except ValidationFailed as exc:
            return JSONResponse(
                status_code=400, content={"error": exc.code, "message": str(exc)}
            )
        return JobAccepted(job_id=job_id)

    @app.get("/v1/jobs/{job_id}")
    def poll(job_id: str) -> Any:
        try:
            return gateway.poll_job(job_id)
        except NotFound as exc:
            return JSONResponse(
                status_code=404, content={"error": exc.code, "message": str(exc)}
            )

    @app.get("/v1/metrics", response_model=MetricsResponse)
    def metrics(window: int | None = None) -> Any:
        rows = gateway.build_metrics_report(window)
        return MetricsResponse(
            header=REPORT_HEADER,
            rows=[
                MetricsRowModel(
                    modality=row.modality.value,
                    accuracy_pct=row.accuracy_pct,
                    mac_gop=row.mac_gop,
                    task=row.task,
                    latency_ms=row.latency_ms,
                    formatted=metrics_row_format(row),
                )
                for row in rows
            ],
        )

    @app.get("/v1/healthz", response_model=HealthResponse)
    def healthz() -> Any:
        return HealthResponse(**gateway.health())

    return app
