"""Tests for the NDJSON backend client against a scriptable fake backend."""

from __future__ import annotations

import base64
import hashlib
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import pytest

from itsgw.core.errors import BackendProtocolError, BackendRemoteError, BackendTimeout
from itsgw.core.records import FrameSequence, Modality
from itsgw.gateway import BackendCaptioner, BackendClient, Gateway, GatewayConfig
from itsgw.visual.chain import run_caption_chain
from itsgw.visual.pgm import encode_pgm
from test_gateway import wait_terminal
from test_visual import checkerboard, flat_frame

FAKE = str(Path(__file__).with_name("fake_backend.py"))


def fake_argv(mode: str) -> list[str]:
    return [sys.executable, FAKE, mode]


def client_for(mode: str, timeout_ms: int = 5000) -> BackendClient:
    return BackendClient(argv=fake_argv(mode), timeout_ms=timeout_ms)


def expected_caption(frame) -> str:
    digest = hashlib.sha256(encode_pgm(frame)).hexdigest()[:8]
    return f"fake caption {digest}"


def test_hello_capabilities_and_model_ids():
    with client_for("normal") as client:
        assert client.capabilities == ("caption", "refine")
        info = client.captioner_info()
        assert info.kind == "external"
        assert info.name == "external:fake-cap-1,fake-ref-1"
        assert info.deterministic is True


def test_caption_and_refine_round_trip():
    frame = checkerboard()
    with client_for("normal") as client:
        caption = client.caption(encode_pgm(frame))
        assert caption == expected_caption(frame)
        text = client.refine("summarize", ["a", "b"])
        assert text == "fake summarize: a | b"


def test_out_of_order_responses_reach_correct_callers():
    # The reorder backend answers each pair of requests in reverse order, so
    # correlation must be by id, not arrival order.
    frames = [flat_frame(10), flat_frame(250)]
    with client_for("reorder") as client:
        with ThreadPoolExecutor(max_workers=2) as pool:
            futures = [pool.submit(client.caption, encode_pgm(f)) for f in frames]
            results = [f.result(timeout=10) for f in futures]
    assert results == [expected_caption(f) for f in frames]


def test_silent_backend_times_out():
    with client_for("silent", timeout_ms=300) as client:
        with pytest.raises(BackendTimeout):
            client.caption(encode_pgm(flat_frame(1)))


def test_mute_backend_fails_handshake():
    with pytest.raises(BackendTimeout):
        BackendClient(argv=fake_argv("mute"), timeout_ms=300)


def test_err_frame_maps_to_remote_error():
    with client_for("errors") as client:
        with pytest.raises(BackendRemoteError) as excinfo:
            client.caption(encode_pgm(flat_frame(9)))
        assert excinfo.value.remote_code == "model_unavailable"
        # The session survives an err frame; other capabilities still work.
        assert client.refine("summarize", ["x"]) == "fake summarize: x"


def test_malformed_line_breaks_session():
    with client_for("malformed") as client:
        with pytest.raises(BackendProtocolError):
            client.caption(encode_pgm(flat_frame(9)))
        with pytest.raises(BackendProtocolError):
            client.refine("summarize", ["x"])  # session stays broken


def test_missing_capability_is_rejected_locally():
    with client_for("no-caption") as client:
        with pytest.raises(BackendRemoteError) as excinfo:
            client.caption(encode_pgm(flat_frame(9)))
        assert excinfo.value.remote_code == "model_unavailable"
        assert client.refine("summarize", ["x", "x"]) == "fake summarize: x | x"


def test_chain_uses_external_backend_and_reports_provenance():
    seq = FrameSequence(frames=(flat_frame(10), checkerboard()))
    with client_for("normal") as client:
        result = run_caption_chain(seq, captioner=BackendCaptioner(client))
    assert result.provenance == "external:fake-cap-1,fake-ref-1"
    assert result.frame_captions == (
        (0, expected_caption(seq.frames[0])),
        (1, expected_caption(seq.frames[1])),
    )
    assert result.refined_text.startswith("fake summarize:")


def test_chain_falls_back_to_builtin_on_timeout():
    seq = FrameSequence(frames=(flat_frame(10),))
    with client_for("silent", timeout_ms=200) as client:
        result = run_caption_chain(seq, captioner=BackendCaptioner(client))
    assert result.provenance == "builtin"
    assert result.refined_text == "summary: a dark scene with low contrast"


def test_chain_without_fallback_surfaces_backend_failure():
    seq = FrameSequence(frames=(flat_frame(10),))
    with client_for("silent", timeout_ms=200) as client:
        with pytest.raises(BackendTimeout):
            run_caption_chain(
                seq, captioner=BackendCaptioner(client), fallback_to_builtin=False
            )


def test_gateway_video_job_via_external_backend(tmp_path):
    config = GatewayConfig(
        queue_capacity=8,
        worker_count=1,
        job_log_path=str(tmp_path / "jobs.ndjson"),
        backend_timeout_ms=5000,
    )
    with client_for("normal") as client:
        gateway = Gateway(config, captioner=BackendCaptioner(client))
        with gateway:
            seq = FrameSequence(frames=(flat_frame(10), flat_frame(245)))
            snap = wait_terminal(gateway, gateway.submit_job(seq))
    assert snap["status"] == "succeeded"
    assert snap["result"]["provenance"] == "external:fake-cap-1,fake-ref-1"
    assert snap["result"]["frame_captions"][0][1] == expected_caption(seq.frames[0])


def test_gateway_falls_back_when_backend_dies(tmp_path):
    config = GatewayConfig(
        queue_capacity=8,
        worker_count=1,
        job_log_path=str(tmp_path / "jobs.ndjson"),
    )
    client = client_for("normal")
    client.close()  # simulate a backend that died after startup
    gateway = Gateway(config, captioner=BackendCaptioner(client))
    with gateway:
        seq = FrameSequence(frames=(flat_frame(10),))
        snap = wait_terminal(gateway, gateway.submit_job(seq))
    assert snap["status"] == "succeeded"
    assert snap["result"]["provenance"] == "builtin"


def test_pgm_payload_b64_round_trip():
    frame = checkerboard()
    encoded = base64.b64encode(encode_pgm(frame)).decode("ascii")
    assert base64.b64decode(encoded) == encode_pgm(frame)
