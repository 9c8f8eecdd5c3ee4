"""The gateway runtime: bounded queue, worker pool, job table, metrics, feedback.

Concurrency layout: one multi-producer queue feeds ``worker_count`` threads;
admission is a counting gate so over-capacity submissions are rejected (never
dropped); the job table is guarded by one lock so status transitions and polls
are atomic; log appends serialize inside JobLog; models are frozen after
registration and shared read-only by workers.
"""

from __future__ import annotations

import queue
import secrets
import threading
from collections import deque
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..core.errors import ItsgwError, ValidationFailed
from ..core.jobs import JobEnvelope, JobError, JobEvent, mono_us
from ..core.labels import (
    CAPTIONING_SCHEMA,
    DEFAULT_CLASSIFICATION_SCHEMA,
    LabelSchema,
    TaskKind,
    load_label_schema,
)
from ..core.metrics import MetricsRow
from ..core.records import (
    AudioClip,
    FrameSequence,
    Modality,
    ModalityInput,
    RecordSchema,
    SensorRecord,
    validate_audio_clip,
    validate_record,
)
from ..encoder.checkpoint import load_checkpoint
from ..encoder.macs import count_macs, macs_to_gop
from ..encoder.model import EncoderModel, forward_classify
from ..encoder.train import SPEED_CLASS_NAMES, SPEED_SCHEMA
from ..fusion.feedback import FeedbackState, RetrainEvent, feedback_update
from ..nn.ops import softmax_rows
from ..text.serialize import serialize_record
from ..text.tokenizer import Vocab, encode, load_vocab
from ..visual.captioner import Captioner, RefineTask
from ..visual.chain import run_caption_chain
from .backend import BackendCaptioner, BackendClient
from .config import GatewayConfig
from .joblog import JobLog, format_entry, payload_digest

MODALITY_ORDER = (Modality.TIME_SERIES, Modality.AUDIO, Modality.VIDEO)
LATENCY_HISTORY = 4096

_ALLOWED_PARAMS = {"type", "task", "stride", "max_frames", "modalities", "window_accuracy"}


class QueueFull(ItsgwError):
    """Backpressure: the bounded queue is at capacity; submit again later."""


class NotFound(ItsgwError):
    pass


class ModelUnavailable(ItsgwError):
    """No model is registered for the requested modality."""


@dataclass
class LoadedModel:
    """A frozen model snapshot plus everything needed to feed it."""

    model: EncoderModel
    vocab: Vocab | None = None
    record_schema: RecordSchema | None = None
    label_schema: LabelSchema = DEFAULT_CLASSIFICATION_SCHEMA


class _AdmissionGate:
    """Counting gate: one slot per queued job, freed when a worker dequeues."""

    def __init__(self, capacity: int) -> None:
        self._capacity = capacity
        self._count = 0
        self._lock = threading.Lock()

    def try_enter(self) -> bool:
        with self._lock:
            if self._count >= self._capacity:
                return False
            self._count += 1
            return True

    def leave(self) -> None:
        with self._lock:
            self._count -= 1

    @property
    def depth(self) -> int:
        with self._lock:
            return self._count


class Gateway:
    """Asynchronous inference service over the three modality pipelines."""

    def __init__(self, config: GatewayConfig, captioner: Captioner | None = None) -> None:
        self.config = config
        self._log = JobLog(config.job_log_path)
        self._queue: queue.Queue[JobEnvelope | None] = queue.Queue()
        self._gate = _AdmissionGate(config.queue_capacity)
        self._table: dict[str, JobEnvelope] = {}
        self._table_lock = threading.Lock()
        self._counter = 0
        self._counter_lock = threading.Lock()
        self._models: dict[Modality, LoadedModel] = {}
        self._eval_accuracy: dict[Modality, float] = {}
        self._latencies: dict[Modality, deque[float]] = {
            m: deque(maxlen=LATENCY_HISTORY) for m in MODALITY_ORDER
        }
        self._feedback: dict[Modality, FeedbackState] = {
            m: FeedbackState(m) for m in MODALITY_ORDER
        }
        self._captioner = captioner
        self._workers: list[threading.Thread] = []
        self._started = False

    # --- lifecycle ---

    def start(self) -> None:
        if self._started:
            return
        self._started = True
        for index in range(self.config.worker_count):
            worker = threading.Thread(
                target=self._worker_loop, name=f"itsgw-worker-{index}", daemon=True
            )
            worker.start()
            self._workers.append(worker)

    def stop(self) -> None:
        if self._started:
            for _ in self._workers:
                self._queue.put(None)
            for worker in self._workers:
                worker.join()
            self._workers.clear()
            self._started = False
        self._log.close()

    def __enter__(self) -> "Gateway":
        self.start()
        return self

    def __exit__(self, *exc: object) -> None:
        self.stop()

    # --- registration ---

    def register_model(
        self,
        modality: Modality,
        model: EncoderModel,
        vocab: Vocab | None = None,
        record_schema: RecordSchema | None = None,
        label_schema: LabelSchema | None = None,
    ) -> None:
        if modality is Modality.TIME_SERIES and (vocab is None or record_schema is None):
            raise ValidationFailed("time_series models need a vocab and a record schema")
        if label_schema is None:
            label_schema = _default_label_schema(model.config.n_classes)
        if label_schema.n_classes != model.config.n_classes:
            raise ValidationFailed(
                f"label schema has {label_schema.n_classes} classes, "
                f"model emits {model.config.n_classes}"
            )
        self._models[modality] = LoadedModel(
            model=model, vocab=vocab, record_schema=record_schema, label_schema=label_schema
        )

    def set_eval_accuracy(self, modality: Modality, accuracy: float) -> None:
        if not 0.0 <= accuracy <= 1.0:
            raise ValidationFailed(f"accuracy outside [0, 1]: {accuracy!r}")
        self._eval_accuracy[Modality(modality)] = accuracy

    # --- submission and polling ---

    def submit_job(self, payload: ModalityInput, params: dict[str, Any] | None = None) -> str:
        params = dict(params or {})
        modality = self._validate_payload(payload, params)
        if not self._gate.try_enter():
            raise QueueFull(f"queue at capacity {self.config.queue_capacity}")
        try:
            envelope = self._admit(modality, payload, params)
        except BaseException:
            self._gate.leave()
            raise
        self._queue.put(envelope)
        return envelope.job_id

    def submit_retrain(self, event: RetrainEvent) -> str | None:
        """Persist a retraining request as an ordinary job; advisory, may drop."""
        modality = sorted(event.modalities, key=lambda m: m.value)[0]
        params = {
            "type": "retrain",
            "modalities": sorted(m.value for m in event.modalities),
            "window_accuracy": event.window_accuracy,
        }
        if not self._gate.try_enter():
            return None  # advisory signal; never backpressures live traffic handling
        try:
            envelope = self._admit(modality, None, params)
        except BaseException:
            self._gate.leave()
            raise
        self._queue.put(envelope)
        return envelope.job_id

    def poll_job(self, job_id: str) -> dict[str, Any]:
        with self._table_lock:
            envelope = self._table.get(job_id)
            if envelope is None:
                raise NotFound(f"no job {job_id!r}")
            return envelope.snapshot()

    @property
    def queue_depth(self) -> int:
        return self._gate.depth

    def health(self) -> dict[str, Any]:
        return {
            "status": "ok",
            "workers": self.config.worker_count,
            "queue_depth": self.queue_depth,
        }

    def _next_job_id(self) -> str:
        with self._counter_lock:
            self._counter += 1
            serial = self._counter
        return f"{serial:06d}-{secrets.token_hex(4)}"

    def _admit(
        self, modality: Modality, payload: ModalityInput | None, params: dict[str, Any]
    ) -> JobEnvelope:
        envelope = JobEnvelope(
            job_id=self._next_job_id(),
            modality=modality,
            payload=payload,
            params=params,
            submitted_at=mono_us(),
        )
        with self._table_lock:
            self._table[envelope.job_id] = envelope
            self._log.append(
                format_entry(
                    envelope.job_id,
                    "queued",
                    modality=modality,
                    digest=payload_digest(payload),
                    mono_us=envelope.submitted_at,
                ),
                durable=False,
            )
        return envelope

    def _validate_payload(self, payload: ModalityInput, params: dict[str, Any]) -> Modality:
        unknown = set(params) - _ALLOWED_PARAMS
        if unknown:
            raise ValidationFailed(f"unknown params: {sorted(unknown)}")
        if "task" in params:
            try:
                RefineTask(params["task"])
            except ValueError:
                raise ValidationFailed(f"unknown task {params['task']!r}") from None
        for key in ("stride", "max_frames"):
            if key in params:
                value = params[key]
                if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                    raise ValidationFailed(f"{key} must be a positive integer")
        if isinstance(payload, SensorRecord):
            loaded = self._models.get(Modality.TIME_SERIES)
            try:
                if loaded is not None and loaded.record_schema is not None:
                    validate_record(
                        loaded.record_schema, payload, n_classes=loaded.label_schema.n_classes
                    )
                elif not payload.values:
                    raise ValidationFailed("record has no values")
            except ItsgwError as exc:
                raise ValidationFailed(str(exc)) from exc
            return Modality.TIME_SERIES
        if isinstance(payload, AudioClip):
            try:
                validate_audio_clip(payload)
            except ItsgwError as exc:
                raise ValidationFailed(str(exc)) from exc
            return Modality.AUDIO
        if isinstance(payload, FrameSequence):
            if not payload.frames:
                raise ValidationFailed("frame sequence is empty")
            return Modality.VIDEO
        raise ValidationFailed(f"unsupported payload type {type(payload).__name__}")

    # --- execution ---

    def _worker_loop(self) -> None:
        while True:
            envelope = self._queue.get()
            if envelope is None:
                return
            self._gate.leave()
            self.worker_execute(envelope, dequeued_at=mono_us())

    def worker_execute(self, envelope: JobEnvelope, dequeued_at: int | None = None) -> JobEnvelope:
        """Run one queued job to a terminal state; failures land in the envelope."""
        started = mono_us()
        dequeued_at = started if dequeued_at is None else dequeued_at
        with self._table_lock:
            envelope.apply(JobEvent.START, now=started)
            self._log.append(
                format_entry(envelope.job_id, "running", mono_us=started), durable=False
            )
        result: dict[str, Any] | None = None
        error: JobError | None = None
        try:
            result = self._dispatch(envelope)
        except ItsgwError as exc:
            error = JobError(code=exc.code, message=str(exc))
        except Exception as exc:  # noqa: BLE001 — workers must survive anything
            error = JobError(code="internal", message=f"{type(exc).__name__}: {exc}")
        finished = mono_us()
        base = envelope.submitted_at if self.config.latency_includes_queue_wait else dequeued_at
        latency_ms = (finished - base) / 1000.0
        if result is not None:
            result["latency_ms"] = latency_ms
            event, entry_error = JobEvent.FINISH_OK, None
        else:
            assert error is not None
            event, entry_error = JobEvent.FINISH_ERR, error.to_dict()
        with self._table_lock:
            envelope.apply(event, now=finished, result=result, error=error)
            self._log.append(
                format_entry(
                    envelope.job_id,
                    envelope.status.value,
                    mono_us=finished,
                    result=result,
                    error=entry_error,
                ),
                durable=True,
            )
        self._latencies[envelope.modality].append(latency_ms)
        self._record_feedback(envelope)
        return envelope

    def _dispatch(self, envelope: JobEnvelope) -> dict[str, Any]:
        if envelope.params.get("type") == "retrain":
            return {
                "type": "retrain",
                "modalities": envelope.params["modalities"],
                "window_accuracy": envelope.params["window_accuracy"],
            }
        if envelope.modality is Modality.TIME_SERIES:
            return self._run_time_series(envelope.payload)
        if envelope.modality is Modality.AUDIO:
            return self._run_audio(envelope.payload)
        return self._run_video(envelope.payload, envelope.params)

    def _classification_result(self, loaded: LoadedModel, logits: np.ndarray) -> dict[str, Any]:
        distribution = softmax_rows(logits.reshape(1, -1))[0]
        class_index = int(np.argmax(distribution))
        return {
            "class_index": class_index,
            "class_name": loaded.label_schema.class_names[class_index],
            "distribution": [float(p) for p in distribution],
        }

    def _run_time_series(self, record: SensorRecord) -> dict[str, Any]:
        loaded = self._models.get(Modality.TIME_SERIES)
        if loaded is None:
            raise ModelUnavailable("no time_series model registered")
        assert loaded.vocab is not None and loaded.record_schema is not None
        text = serialize_record(loaded.record_schema, record)
        encoded = encode(text, loaded.vocab, max_len=loaded.model.config.max_len)
        logits = forward_classify(loaded.model, encoded)
        return self._classification_result(loaded, logits)

    def _run_audio(self, clip: AudioClip) -> dict[str, Any]:
        # Imported here to keep module import cheap for CLI paths that never
        # touch audio.
        from ..audio.features import log_spectrogram, normalize_clip

        features = log_spectrogram(normalize_clip(clip))  # preprocess before model lookup
        loaded = self._models.get(Modality.AUDIO)
        if loaded is None:
            raise ModelUnavailable("no audio model registered")
        frames = features.frames[: loaded.model.config.max_len]
        mask = np.ones(frames.shape[0], dtype=bool)
        logits = forward_classify(loaded.model, (frames, mask))
        return self._classification_result(loaded, logits)

    def _run_video(self, seq: FrameSequence, params: dict[str, Any]) -> dict[str, Any]:
        chain = run_caption_chain(
            seq,
            captioner=self._captioner,
            task=RefineTask(params.get("task", RefineTask.SUMMARIZE)),
            stride=int(params.get("stride", 1)),
            max_frames=int(params.get("max_frames", 16)),
            fallback_to_builtin=self.config.fallback_to_builtin,
        )
        return {
            "frame_captions": [[index, caption] for index, caption in chain.frame_captions],
            "refined_text": chain.refined_text,
            "task": chain.task.value,
            "provenance": chain.provenance,
        }

    def _record_feedback(self, envelope: JobEnvelope) -> None:
        if envelope.params.get("type") == "retrain" or envelope.result is None:
            return
        payload = envelope.payload
        label = getattr(payload, "label", None)
        if label is None or "class_index" not in envelope.result:
            return
        correct = envelope.result["class_index"] == label
        event = feedback_update(self._feedback[envelope.modality], correct)
        if event is not None:
            self.submit_retrain(event)

    # --- metrics ---

    def build_metrics_report(self, window: int | None = None) -> list[MetricsRow]:
        """One row per modality that has executed at least one job."""
        rows: list[MetricsRow] = []
        for modality in MODALITY_ORDER:
            history = list(self._latencies[modality])
            if window is not None:
                history = history[-window:]
            if not history:
                continue
            accuracy = self._eval_accuracy.get(modality)
            loaded = self._models.get(modality)
            if loaded is not None:
                model = loaded.model
                gop = macs_to_gop(count_macs(model.config, model.config.max_len))
                task = loaded.label_schema.task_name
            else:
                gop = 0.0
                task = CAPTIONING_SCHEMA.task_name if modality is Modality.VIDEO else (
                    DEFAULT_CLASSIFICATION_SCHEMA.task_name
                )
            rows.append(
                MetricsRow(
                    modality=modality,
                    accuracy_pct=None if accuracy is None else accuracy * 100.0,
                    mac_gop=gop,
                    task=task,
                    latency_ms=sum(history) / len(history),
                )
            )
        return rows


def _default_label_schema(n_classes: int) -> LabelSchema:
    if n_classes == len(SPEED_CLASS_NAMES):
        return LabelSchema(class_names=SPEED_CLASS_NAMES, task_kind=TaskKind.CLASSIFICATION)
    if n_classes == DEFAULT_CLASSIFICATION_SCHEMA.n_classes:
        return DEFAULT_CLASSIFICATION_SCHEMA
    return LabelSchema(
        class_names=tuple(f"class_{i}" for i in range(n_classes)),
        task_kind=TaskKind.CLASSIFICATION,
    )


def gateway_from_config(config: GatewayConfig) -> Gateway:
    """Build a gateway from config: checkpoints, vocab sidecars, backend client."""
    captioner: Captioner | None = None
    if config.backend_argv is not None or config.backend_endpoint is not None:
        endpoint = None
        if config.backend_endpoint is not None:
            host, _, port = config.backend_endpoint.rpartition(":")
            endpoint = (host, int(port))
        client = BackendClient(
            argv=config.backend_argv, endpoint=endpoint, timeout_ms=config.backend_timeout_ms
        )
        captioner = BackendCaptioner(client)
    gateway = Gateway(config, captioner=captioner)
    label_schema = (
        load_label_schema(config.label_schema_path) if config.label_schema_path else None
    )
    for modality, path in config.checkpoint_paths.items():
        model = load_checkpoint(path)
        vocab = None
        if model.config.vocab_size is not None:
            vocab = load_vocab(str(path) + ".vocab")
        gateway.register_model(
            modality,
            model,
            vocab=vocab,
            record_schema=SPEED_SCHEMA if modality is Modality.TIME_SERIES else None,
            label_schema=label_schema,
        )
    return gateway
