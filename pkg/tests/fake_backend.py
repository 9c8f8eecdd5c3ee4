"""Scriptable NDJSON backend used by the client and conformance tests.

Modes (first argv):
  normal      answer every request in order
  reorder     buffer pairs of requests, answer each pair in reverse order
  silent      send hello, then swallow every request
  malformed   answer the first request with a garbage line
  errors      answer caption with err{model_unavailable}, refine normally
  no-caption  hello declares only ["refine"]
  mute        never send hello at all
"""

from __future__ import annotations

import base64
import hashlib
import json
import sys


def send(obj) -> None:
    sys.stdout.write(json.dumps(obj, separators=(",", ":")) + "\n")
    sys.stdout.flush()


def caption_of(image_b64: str) -> str:
    digest = hashlib.sha256(base64.b64decode(image_b64)).hexdigest()[:8]
    return f"fake caption {digest}"


def answer(req: dict) -> dict:
    if req["type"] == "caption_req":
        return {"type": "caption_res", "id": req["id"], "caption": caption_of(req["image_pgm_b64"])}
    if req["type"] == "refine_req":
        return {
            "type": "refine_res",
            "id": req["id"],
            "text": f"fake {req['task']}: " + " | ".join(req["captions"]),
        }
    return {"type": "err", "id": req.get("id"), "code": "bad_request", "message": "unknown type"}


def main() -> int:
    mode = sys.argv[1] if len(sys.argv) > 1 else "normal"
    if mode == "mute":
        for _ in sys.stdin:
            pass
        return 0
    capabilities = ["refine"] if mode == "no-caption" else ["caption", "refine"]
    send(
        {
            "v": 1,
            "type": "hello",
            "capabilities": capabilities,
            "models": {"captioner": "fake-cap-1", "refiner": "fake-ref-1"},
            "deterministic": True,
        }
    )
    buffered: list[dict] = []
    answered = 0
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        req = json.loads(line)
        if mode == "silent":
            continue
        if mode == "malformed" and answered == 0:
            sys.stdout.write("this is not json\n")
            sys.stdout.flush()
            answered += 1
            continue
        if mode == "errors" and req["type"] == "caption_req":
            send(
                {
                    "type": "err",
                    "id": req["id"],
                    "code": "model_unavailable",
                    "message": "captioner offline",
                }
            )
            continue
        if mode == "reorder":
            buffered.append(req)
            if len(buffered) == 2:
                for item in reversed(buffered):
                    send(answer(item))
                buffered.clear()
            continue
        send(answer(req))
        answered += 1
    for item in reversed(buffered):
        send(answer(item))
    return 0


if __name__ == "__main__":
    sys.exit(main())
