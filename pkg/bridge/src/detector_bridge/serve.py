"""The stdio protocol loop.

One request per line on stdin, one response per line on stdout; logging
goes to stderr so it never corrupts the protocol stream. The loop is
single-threaded and stateless across requests: identical requests get
identical responses for a deterministic model.
"""

from __future__ import annotations

import base64
import io
import json
import logging
import sys

import numpy as np
from PIL import Image

from .config import BridgeConfig
from .model import DetectionModel

PROTOCOL_VERSION = 1

log = logging.getLogger("detector_bridge")


def _load_image(request: dict) -> np.ndarray:
    if "image_path" in request:
        with Image.open(request["image_path"]) as im:
            return np.asarray(im.convert("RGB"))
    if "image_png_b64" in request:
        raw = base64.b64decode(request["image_png_b64"])
        with Image.open(io.BytesIO(raw)) as im:
            return np.asarray(im.convert("RGB"))
    raise ValueError("detect request carries neither image_path nor image_png_b64")


def _emit(payload: dict, out) -> None:
    out.write(json.dumps(payload, separators=(",", ":")) + "\n")
    out.flush()


def _error(message: str, req_id=None) -> dict:
    payload = {"type": "error", "message": message}
    if req_id is not None:
        payload["id"] = req_id
    return payload


def serve(config: BridgeConfig, stdin=None, stdout=None) -> int:
    """Answer protocol requests until stdin closes."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    model = DetectionModel(config)
    log.info("serving %s (cutoff %.2f)", model.name, config.confidence_cutoff)

    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            msg = json.loads(line)
        except json.JSONDecodeError:
            _emit(_error("request is not valid JSON"), stdout)
            continue
        if not isinstance(msg, dict):
            _emit(_error("request must be a JSON object"), stdout)
            continue

        msg_type = msg.get("type")
        if msg_type == "hello":
            if msg.get("protocol") != PROTOCOL_VERSION:
                _emit(_error(f"unsupported protocol {msg.get('protocol')!r}"), stdout)
                continue
            _emit(
                {
                    "type": "hello_ack",
                    "protocol": PROTOCOL_VERSION,
                    "name": model.name,
                    "max_concurrency": 1,
                },
                stdout,
            )
            continue
        if msg_type != "detect":
            _emit(_error(f"unknown request type {msg_type!r}", msg.get("id")), stdout)
            continue

        req_id = msg.get("id")
        if req_id is None:
            _emit(_error("detect request carries no id"), stdout)
            continue
        try:
            image = _load_image(msg)
            items = model.infer(image)
        except Exception as exc:
            log.warning("detect %s failed: %s", req_id, exc)
            _emit(_error(str(exc), req_id), stdout)
            continue
        _emit({"type": "detections", "id": req_id, "items": items}, stdout)
    return 0
