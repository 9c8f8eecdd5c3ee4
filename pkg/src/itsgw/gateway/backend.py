"""Client for external caption/refine backends speaking NDJSON.

The backend is either a child process (messages over its standard streams)
or a TCP endpoint. It speaks first: a hello line declaring protocol version 1
and its capabilities. After that the client sends uniquely-numbered requests
and a reader thread correlates responses, which may arrive out of order.
"""

from __future__ import annotations

import base64
import json
import socket
import subprocess
import threading
from dataclasses import dataclass, field
from typing import IO, Any

from ..core.errors import BackendProtocolError, BackendRemoteError, BackendTimeout
from ..core.records import Frame
from ..visual.captioner import CaptionerInfo, RefineTask
from ..visual.pgm import encode_pgm

PROTOCOL_VERSION = 1
ERR_CODES = ("model_unavailable", "bad_request", "internal")


@dataclass
class _Pending:
    done: threading.Event = field(default_factory=threading.Event)
    payload: dict[str, Any] | None = None
    failure: Exception | None = None


class BackendClient:
    """One NDJSON session with an external backend; safe for concurrent callers."""

    def __init__(
        self,
        argv: list[str] | None = None,
        endpoint: tuple[str, int] | None = None,
        timeout_ms: int = 10_000,
    ) -> None:
        if (argv is None) == (endpoint is None):
            raise ValueError("pass exactly one of argv (subprocess) or endpoint (TCP)")
        self.timeout_s = timeout_ms / 1000.0
        self._proc: subprocess.Popen[str] | None = None
        self._sock: socket.socket | None = None
        if argv is not None:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,  # line buffered
            )
            self._writer: IO[str] = self._proc.stdin  # type: ignore[assignment]
            self._reader: IO[str] = self._proc.stdout  # type: ignore[assignment]
        else:
            self._sock = socket.create_connection(endpoint, timeout=self.timeout_s)
            self._sock.settimeout(None)
            self._writer = self._sock.makefile("w", encoding="utf-8", newline="\n")
            self._reader = self._sock.makefile("r", encoding="utf-8")
        self._write_lock = threading.Lock()
        self._pending_lock = threading.Lock()
        self._pending: dict[int, _Pending] = {}
        self._next_id = 1
        self._closed = threading.Event()
        self._broken: Exception | None = None
        self._hello: dict[str, Any] | None = None
        self._hello_ready = threading.Event()
        self._thread = threading.Thread(target=self._read_loop, daemon=True)
        self._thread.start()
        if not self._hello_ready.wait(self.timeout_s):
            self.close()
            raise BackendTimeout("backend did not send hello in time")
        if self._broken is not None:
            failure = self._broken
            self.close()
            raise failure

    # --- session metadata ---

    @property
    def capabilities(self) -> tuple[str, ...]:
        hello = self._hello or {}
        return tuple(hello.get("capabilities", ()))

    @property
    def hello(self) -> dict[str, Any]:
        return dict(self._hello or {})

    def captioner_info(self) -> CaptionerInfo:
        hello = self._hello or {}
        models = hello.get("models")
        if isinstance(models, dict) and models:
            name = "external:" + ",".join(str(models[k]) for k in sorted(models))
        elif isinstance(models, list) and models:
            name = "external:" + ",".join(str(m) for m in models)
        else:
            name = "external-backend"
        return CaptionerInfo(
            name=name,
            kind="external",
            deterministic=bool(hello.get("deterministic", True)),
        )

    # --- reader side ---

    def _read_loop(self) -> None:
        try:
            for raw in self._reader:
                line = raw.strip()
                if not line:
                    continue
                try:
                    msg = json.loads(line)
                except json.JSONDecodeError:
                    self._fail_session(BackendProtocolError(f"unparseable line: {line[:80]!r}"))
                    return
                if not isinstance(msg, dict):
                    self._fail_session(BackendProtocolError("backend sent a non-object line"))
                    return
                kind = msg.get("type")
                if kind == "hello":
                    self._hello = msg
                    self._hello_ready.set()
                    continue
                if kind in ("caption_res", "refine_res", "err"):
                    self._deliver(msg)
                    continue
                self._fail_session(BackendProtocolError(f"unknown message type {kind!r}"))
                return
        except (OSError, ValueError):
            pass
        self._fail_session(BackendProtocolError("backend closed the stream"))

    def _deliver(self, msg: dict[str, Any]) -> None:
        request_id = msg.get("id")
        with self._pending_lock:
            pending = self._pending.pop(request_id, None)
        if pending is None:
            self._fail_session(
                BackendProtocolError(f"response for unknown or duplicate id {request_id!r}")
            )
            return
        if msg.get("type") == "err":
            code = str(msg.get("code", "internal"))
            pending.failure = BackendRemoteError(code, str(msg.get("message", "")))
        else:
            pending.payload = msg
        pending.done.set()

    def _fail_session(self, failure: Exception) -> None:
        if self._broken is None:
            self._broken = failure
        self._hello_ready.set()
        with self._pending_lock:
            pending_now = list(self._pending.values())
            self._pending.clear()
        for pending in pending_now:
            pending.failure = failure
            pending.done.set()

    # --- writer side ---

    def _request(self, body: dict[str, Any]) -> dict[str, Any]:
        if self._broken is not None:
            raise BackendProtocolError(f"session is broken: {self._broken}")
        if self._closed.is_set():
            raise BackendProtocolError("client is closed")
        pending = _Pending()
        with self._pending_lock:
            request_id = self._next_id
            self._next_id += 1
            self._pending[request_id] = pending
        body = {"v": PROTOCOL_VERSION, **body, "id": request_id}
        line = json.dumps(body, separators=(",", ":"))
        try:
            with self._write_lock:
                self._writer.write(line + "\n")
                self._writer.flush()
        except (OSError, ValueError) as exc:
            with self._pending_lock:
                self._pending.pop(request_id, None)
            raise BackendProtocolError(f"could not write to backend: {exc}") from exc
        if not pending.done.wait(self.timeout_s):
            with self._pending_lock:
                self._pending.pop(request_id, None)
            raise BackendTimeout(f"no response for request {request_id} in {self.timeout_s}s")
        if pending.failure is not None:
            raise pending.failure
        assert pending.payload is not None
        return pending.payload

    def caption(self, image_pgm: bytes) -> str:
        if "caption" not in self.capabilities:
            raise BackendRemoteError("model_unavailable", "backend lacks caption capability")
        response = self._request(
            {"type": "caption_req", "image_pgm_b64": base64.b64encode(image_pgm).decode("ascii")}
        )
        if response.get("type") != "caption_res" or not isinstance(response.get("caption"), str):
            raise BackendProtocolError("malformed caption_res")
        return response["caption"]

    def refine(self, task: str, captions: list[str]) -> str:
        if "refine" not in self.capabilities:
            raise BackendRemoteError("model_unavailable", "backend lacks refine capability")
        response = self._request({"type": "refine_req", "task": task, "captions": captions})
        if response.get("type") != "refine_res" or not isinstance(response.get("text"), str):
            raise BackendProtocolError("malformed refine_res")
        return response["text"]

    def close(self) -> None:
        if self._closed.is_set():
            return
        self._closed.set()
        try:
            self._writer.close()
        except (OSError, ValueError):
            pass
        if self._proc is not None:
            try:
                self._proc.wait(timeout=2.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        if self._sock is not None:
            try:
                self._sock.close()
            except OSError:
                pass
        self._thread.join(timeout=2.0)

    def __enter__(self) -> "BackendClient":
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()


class BackendCaptioner:
    """Adapts a BackendClient to the captioner interface used by the chain."""

    def __init__(self, client: BackendClient) -> None:
        self._client = client
        self.info = client.captioner_info()

    def caption(self, frame: Frame) -> str:
        return self._client.caption(encode_pgm(frame))

    def refine(self, captions: list[str], task: RefineTask) -> str:
        return self._client.refine(RefineTask(task).value, list(captions))
