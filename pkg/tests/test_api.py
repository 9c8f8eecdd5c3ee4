"""HTTP surface tests: submit, poll, metrics, health."""

from __future__ import annotations

import base64
import time

import pytest
from fastapi.testclient import TestClient

from itsgw.core.records import Modality
from itsgw.encoder import EncoderConfig, init_model
from itsgw.gateway.api import create_app
from itsgw.visual.pgm import encode_pgm
from test_audio import wav_bytes
from test_gateway import make_gateway, register_speed
from test_visual import checkerboard, flat_frame


@pytest.fixture()
def service(tmp_path, speed_model):
    gateway = make_gateway(tmp_path, capacity=16, workers=2)
    register_speed(gateway, speed_model)
    gateway.set_eval_accuracy(Modality.TIME_SERIES, speed_model[2])
    gateway.start()
    try:
        yield TestClient(create_app(gateway)), gateway
    finally:
        gateway.stop()


def poll_until_terminal(client: TestClient, job_id: str, timeout=10.0) -> dict:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        response = client.get(f"/v1/jobs/{job_id}")
        assert response.status_code == 200
        body = response.json()
        if body["status"] in ("succeeded", "failed"):
            return body
        time.sleep(0.002)
    raise AssertionError("job never reached a terminal state")


def test_submit_and_poll_tabular_job(service):
    client, _ = service
    response = client.post(
        "/v1/jobs",
        json={"modality": "time_series", "payload": {"values": [111.5]}},
    )
    assert response.status_code == 202
    job_id = response.json()["job_id"]
    body = poll_until_terminal(client, job_id)
    assert body["status"] == "succeeded"
    assert body["result"]["class_name"] == "speeding"
    again = client.get(f"/v1/jobs/{job_id}").json()
    assert again == body  # terminal snapshots do not change between polls


def test_submit_video_job_inline_frames(service):
    client, _ = service
    frames_b64 = [
        base64.b64encode(encode_pgm(frame)).decode("ascii")
        for frame in (flat_frame(30), checkerboard())
    ]
    response = client.post(
        "/v1/jobs",
        json={
            "modality": "video",
            "payload": {"frames_pgm_b64": frames_b64},
            "params": {"task": "summarize"},
        },
    )
    assert response.status_code == 202
    body = poll_until_terminal(client, response.json()["job_id"])
    assert body["status"] == "succeeded"
    assert body["result"]["provenance"] == "builtin"
    assert body["result"]["refined_text"].startswith("summary: ")


def test_submit_audio_job_wav_b64(service, tmp_path):
    client, gateway = service
    config = EncoderConfig(
        n_layers=1, n_heads=2, d_model=16, d_ff=32, max_len=100,
        n_classes=2, feature_dim=257, seed=1,
    )
    gateway.register_model(Modality.AUDIO, init_model(config))
    wav = wav_bytes([100, -100] * 8000)
    response = client.post(
        "/v1/jobs",
        json={
            "modality": "audio",
            "payload": {"wav_b64": base64.b64encode(wav).decode("ascii")},
        },
    )
    assert response.status_code == 202
    body = poll_until_terminal(client, response.json()["job_id"])
    assert body["status"] == "succeeded"
    assert len(body["result"]["distribution"]) == 2


def test_bad_payload_returns_400(service):
    client, _ = service
    cases = [
        {"modality": "time_series", "payload": {"values": []}},
        {"modality": "time_series", "payload": {}},
        {"modality": "time_series", "payload": {"values": [1.0, 2.0]}},
        {"modality": "audio", "payload": {"wav_b64": "!!!not base64!!!"}},
        {"modality": "audio", "payload": {}},
        {"modality": "video", "payload": {"frames_pgm_b64": ["aGk="]}},
        {"modality": "video", "payload": {}},
        {"modality": "time_series", "payload": {"values": [1.0]}, "params": {"zzz": 1}},
    ]
    for body in cases:
        response = client.post("/v1/jobs", json=body)
        assert response.status_code == 400, body
        assert response.json()["error"] == "ValidationFailed"


def test_queue_full_returns_429(tmp_path, speed_model):
    gateway = make_gateway(tmp_path, capacity=1, workers=1)  # never started
    register_speed(gateway, speed_model)
    client = TestClient(create_app(gateway))
    body = {"modality": "time_series", "payload": {"values": [5.0]}}
    assert client.post("/v1/jobs", json=body).status_code == 202
    response = client.post("/v1/jobs", json=body)
    assert response.status_code == 429
    assert response.json()["error"] == "QueueFull"
    gateway.stop()


def test_poll_unknown_job_returns_404(service):
    client, _ = service
    response = client.get("/v1/jobs/000000-00000000")
    assert response.status_code == 404
    assert response.json()["error"] == "NotFound"


def test_metrics_endpoint_rows(service):
    client, _ = service
    for value in (10.0, 90.0):
        response = client.post(
            "/v1/jobs", json={"modality": "time_series", "payload": {"values": [value]}}
        )
        poll_until_terminal(client, response.json()["job_id"])
    body = client.get("/v1/metrics").json()
    assert body["header"] == "modality\taccuracy\tmac_gop\ttask\tlatency_ms"
    assert len(body["rows"]) == 1
    row = body["rows"][0]
    assert row["modality"] == "time_series"
    assert row["task"] == "Classification"
    fields = row["formatted"].split("\t")
    assert fields[0] == "time_series"
    assert fields[1].endswith("%")
    assert fields[3] == "Classification"


def test_healthz(service):
    client, _ = service
    body = client.get("/v1/healthz").json()
    assert body == {"status": "ok", "workers": 2, "queue_depth": 0}
