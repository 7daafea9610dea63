from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from weathergauge.augment import kernels
from weathergauge.augment.kernels import reference
from weathergauge.detectors import DetectorHandle, OracleSpec
from weathergauge.geometry import BoundingBox, Detection


@pytest.fixture
def rng():
    return np.random.default_rng(20240816)


@pytest.fixture
def random_image(rng):
    return rng.integers(0, 256, size=(48, 64, 3), dtype=np.uint8)


def uniform_image(value: int, width: int = 64, height: int = 64) -> np.ndarray:
    return np.full((height, width, 3), value, dtype=np.uint8)


def scripted_detector(
    detector_id: str = "oracle",
    thresholds: dict | None = None,
    failure_mode: str = "disappear",
    confidence_model: str = "constant",
    base: Detection | None = "default",
) -> DetectorHandle:
    if base == "default":
        base = Detection("car", BoundingBox(16.0, 16.0, 24.0, 24.0), 0.9)
    spec = OracleSpec(
        kind="scripted_threshold",
        fail_threshold=thresholds or {},
        failure_mode=failure_mode,
        base_detection=base,
        confidence_model=confidence_model,
    )
    return DetectorHandle(detector_id=detector_id, oracle=spec)


def luminance_detector(
    detector_id: str = "lum", lo: float = 0.0, hi: float = 255.0
) -> DetectorHandle:
    spec = OracleSpec(kind="luminance_band", luminance_band=(lo, hi))
    return DetectorHandle(detector_id=detector_id, oracle=spec)


@pytest.fixture
def use_reference_backend(monkeypatch):
    """Route the augmentation ops through the numpy kernels."""
    for name in kernels.__all__:
        if name == "BACKEND":
            continue
        monkeypatch.setattr(kernels, name, getattr(reference, name))
    monkeypatch.setattr(kernels, "BACKEND", "reference")


class ScriptedHttpHandler(BaseHTTPRequestHandler):
    """Minimal HTTP detector: fixed hello_ack and one fixed detection."""

    def log_message(self, *args):
        pass

    def _reply(self, payload: dict):
        body = json.dumps(payload).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path == "/hello":
            self._reply(
                {
                    "type": "hello_ack",
                    "protocol": 1,
                    "name": "http-detector",
                    "max_concurrency": 4,
                }
            )
        else:
            self.send_error(404)

    def do_POST(self):
        if self.path != "/detect":
            self.send_error(404)
            return
        length = int(self.headers.get("Content-Length", "0"))
        req = json.loads(self.rfile.read(length))
        items = [{"class": "bus", "bbox": [2.0, 3.0, 20.0, 10.0], "confidence": 0.6}]
        self._reply({"type": "detections", "id": req["id"], "items": items})


@pytest.fixture
def http_detector_url():
    server = ThreadingHTTPServer(("127.0.0.1", 0), ScriptedHttpHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()
    thread.join(timeout=5)
