"""Uniform detector access: builtin synthetic oracles plus external
models behind a subprocess or HTTP wire protocol.

Wire protocol (line-delimited JSON on the child's stdin/stdout; the HTTP
transport mirrors the same bodies on POST /detect and GET /hello):

  -> {"type": "hello", "protocol": 1}
  <- {"type": "hello_ack", "protocol": 1, "name": "...", "max_concurrency": 1}
  -> {"type": "detect", "id": "...", "image_path": "/abs/path.png"}
     or {"type": "detect", "id": "...", "image_png_b64": "..."}
  <- {"type": "detections", "id": "...", "items": [
         {"class": "car", "bbox": [x, y, w, h], "confidence": 0.93}]}
  <- {"type": "error", "id": "...", "message": "..."}

Coordinates are pixels, top-left origin; floats allowed.

Builtin oracles exist so the search and metrics layers can be verified
against analytically known failure behavior: scripted_threshold oracles
fail from a per-operator strength threshold onward (the harness supplies
the probe context), while luminance_band oracles decide purely from the
image (detect iff mean luminance lies in the band).
"""

from __future__ import annotations

import base64
import io
import itertools
import json
import queue
import shlex
import subprocess
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import requests
from PIL import Image

from .augment import OperatorKind
from .errors import (
    ConfigError,
    HandshakeError,
    ProbeError,
    ProtocolError,
    TransportError,
)
from .geometry import BoundingBox, Detection, DetectionSet
from .image import read_image, require_rgb8

__all__ = [
    "PROTOCOL_VERSION",
    "ProbeContext",
    "OracleSpec",
    "DetectorHandle",
    "DetectorInfo",
    "detect",
    "handshake",
    "close_detector",
    "handle_from_dict",
    "handle_to_dict",
]

PROTOCOL_VERSION = 1

_TRANSPORTS = ("builtin", "subprocess", "http")
_ORACLE_KINDS = ("scripted_threshold", "luminance_band")
_FAILURE_MODES = ("disappear", "class_flip", "box_drift")
_CONFIDENCE_MODELS = ("constant", "linear_decay")


@dataclass(frozen=True)
class ProbeContext:
    """What the harness is probing: operator and interference strength."""

    operator: OperatorKind
    strength: float


def _default_detection() -> Detection:
    return Detection("car", BoundingBox(16.0, 16.0, 24.0, 24.0), 0.9)


@dataclass
class OracleSpec:
    """Synthetic detector behavior with analytically known failures."""

    kind: str = "scripted_threshold"
    fail_threshold: dict[str, float] = field(default_factory=dict)
    failure_mode: str = "disappear"
    base_detection: Detection | None = field(default_factory=_default_detection)
    confidence_model: str = "constant"
    luminance_band: tuple[float, float] = (0.0, 255.0)

    def __post_init__(self):
        if self.kind not in _ORACLE_KINDS:
            raise ConfigError(f"unknown oracle kind {self.kind!r}")
        if self.failure_mode not in _FAILURE_MODES:
            raise ConfigError(f"unknown failure mode {self.failure_mode!r}")
        if self.confidence_model not in _CONFIDENCE_MODELS:
            raise ConfigError(f"unknown confidence model {self.confidence_model!r}")
        normalized = {}
        for op, t in self.fail_threshold.items():
            key = OperatorKind(op).value
            if not 0.0 < float(t) <= 1.0:
                raise ConfigError(f"fail threshold for {key} outside (0, 1]: {t}")
            normalized[key] = float(t)
        self.fail_threshold = normalized
        lo, hi = self.luminance_band
        if not lo <= hi:
            raise ConfigError(f"luminance band is empty: [{lo}, {hi}]")

    @property
    def needs_pixels(self) -> bool:
        return self.kind == "luminance_band"


@dataclass(frozen=True)
class DetectorInfo:
    name: str
    protocol: int
    max_concurrency: int


@dataclass
class DetectorHandle:
    """A pluggable detector: builtin oracle, child process, or HTTP service."""

    detector_id: str
    transport: str = "builtin"
    endpoint: str | None = None
    max_concurrency: int = 1
    timeout_ms: int = 30000
    oracle: OracleSpec | None = None
    _client: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.transport not in _TRANSPORTS:
            raise ConfigError(f"unknown transport {self.transport!r}")
        if self.transport == "builtin":
            if self.oracle is None:
                raise ConfigError("builtin handles carry an OracleSpec")
        elif not self.endpoint:
            raise ConfigError(f"{self.transport} handles carry an endpoint")
        if self.max_concurrency < 1:
            raise ConfigError("max_concurrency must be >= 1")


def _mean_luminance(image: np.ndarray) -> float:
    arr = require_rgb8(image).astype(np.float64)
    lum = 0.299 * arr[:, :, 0] + 0.587 * arr[:, :, 1] + 0.114 * arr[:, :, 2]
    return float(lum.mean())


def _oracle_confidence(spec: OracleSpec, strength: float) -> float:
    if spec.confidence_model == "linear_decay":
        return max(0.0, 1.0 - strength)
    assert spec.base_detection is not None
    return spec.base_detection.confidence


def _oracle_detect(
    spec: OracleSpec, image: np.ndarray | None, image_path: str | None, probe: ProbeContext | None
) -> DetectionSet:
    strength = 0.0 if probe is None else float(probe.strength)
    if spec.base_detection is None:
        return DetectionSet()
    if spec.kind == "luminance_band":
        if image is None:
            if image_path is None:
                raise ProbeError("luminance oracle needs image pixels")
            image = read_image(image_path)
        lo, hi = spec.luminance_band
        if not lo <= _mean_luminance(image) <= hi:
            return DetectionSet()
        base = spec.base_detection
        return DetectionSet([Detection(base.class_label, base.box, _oracle_confidence(spec, strength))])
    threshold = None if probe is None else spec.fail_threshold.get(probe.operator.value)
    conf = _oracle_confidence(spec, strength)
    base = spec.base_detection
    if threshold is None or strength < threshold:
        return DetectionSet([Detection(base.class_label, base.box, conf)])
    if spec.failure_mode == "disappear":
        return DetectionSet()
    if spec.failure_mode == "class_flip":
        return DetectionSet([Detection(base.class_label + "_flip", base.box, conf)])
    # box_drift: shift by w/3 so IoU against the base box is exactly 0.5,
    # which fails the strict "> delta" clause at the default delta.
    b = base.box
    drifted = BoundingBox(b.x + b.w / 3.0, b.y, b.w, b.h)
    return DetectionSet([Detection(base.class_label, drifted, conf)])


def _parse_items(raw) -> DetectionSet:
    if not isinstance(raw, list):
        raise ProtocolError(f"items must be a list, got {type(raw).__name__}")
    items = []
    for entry in raw:
        if not isinstance(entry, dict):
            raise ProtocolError("detection item must be an object")
        label = entry.get("class")
        bbox = entry.get("bbox")
        conf = entry.get("confidence")
        if not isinstance(label, str) or not label:
            raise ProtocolError(f"bad class label {label!r}")
        if not isinstance(bbox, list) or len(bbox) != 4:
            raise ProtocolError(f"bad bbox {bbox!r}")
        try:
            x, y, w, h = (float(v) for v in bbox)
        except (TypeError, ValueError) as exc:
            raise ProtocolError(f"non-numeric bbox {bbox!r}") from exc
        if w <= 0 or h <= 0:
            raise ProtocolError(f"non-positive box extent in {bbox!r}")
        if not isinstance(conf, (int, float)) or not 0.0 <= float(conf) <= 1.0:
            raise ProtocolError(f"confidence outside [0, 1]: {conf!r}")
        items.append(Detection(label, BoundingBox(x, y, w, h), float(conf)))
    return DetectionSet(items)


def _parse_hello_ack(msg: dict) -> DetectorInfo:
    if msg.get("type") == "error":
        raise HandshakeError(f"detector refused handshake: {msg.get('message')}")
    if msg.get("type") != "hello_ack":
        raise ProtocolError(f"expected hello_ack, got {msg.get('type')!r}")
    proto = msg.get("protocol")
    if proto != PROTOCOL_VERSION:
        raise HandshakeError(
            f"detector speaks protocol {proto!r}, harness speaks {PROTOCOL_VERSION}"
        )
    name = msg.get("name")
    if not isinstance(name, str) or not name:
        raise ProtocolError("hello_ack carries no detector name")
    mc = msg.get("max_concurrency", 1)
    if not isinstance(mc, int) or mc < 1:
        raise ProtocolError(f"bad max_concurrency {mc!r}")
    return DetectorInfo(name=name, protocol=proto, max_concurrency=mc)


def _png_b64(image: np.ndarray) -> str:
    buf = io.BytesIO()
    Image.fromarray(require_rgb8(image), mode="RGB").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


_request_ids = itertools.count(1)


def _detect_body(image: np.ndarray | None, image_path: str | None) -> tuple[dict, str]:
    req_id = f"req-{next(_request_ids)}"
    body: dict = {"type": "detect", "id": req_id}
    if image_path is not None:
        body["image_path"] = str(Path(image_path).resolve())
    elif image is not None:
        body["image_png_b64"] = _png_b64(image)
    else:
        raise ProbeError("detect needs an image or an image path")
    return body, req_id


def _parse_detect_response(msg: dict, req_id: str) -> DetectionSet:
    if msg.get("type") == "error":
        if "id" in msg and msg["id"] != req_id:
            raise ProtocolError(f"error response for {msg['id']!r}, expected {req_id!r}")
        raise ProbeError(f"detector error: {msg.get('message')}")
    if msg.get("type") != "detections":
        raise ProtocolError(f"expected detections, got {msg.get('type')!r}")
    if msg.get("id") != req_id:
        raise ProtocolError(f"response id {msg.get('id')!r} does not match {req_id!r}")
    return _parse_items(msg.get("items"))


class _SubprocessClient:
    """One child process, synchronous request/response over its pipes."""

    def __init__(self, handle: DetectorHandle):
        self._timeout = handle.timeout_ms / 1000.0
        self._dead: str | None = None
        try:
            self._proc = subprocess.Popen(
                shlex.split(handle.endpoint),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise TransportError(f"cannot start detector process: {exc}") from exc
        self._lines: queue.Queue[str | None] = queue.Queue()
        threading.Thread(target=self._pump, daemon=True).start()
        self._lock = threading.Lock()
        try:
            with self._lock:
                self._send({"type": "hello", "protocol": PROTOCOL_VERSION})
                self.info = _parse_hello_ack(self._recv())
        except Exception:
            self.close()  # don't leave the child orphaned on a failed handshake
            raise

    def _pump(self):
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def _send(self, obj: dict) -> None:
        try:
            self._proc.stdin.write(json.dumps(obj, separators=(",", ":")) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise TransportError(f"detector process pipe closed: {exc}") from exc

    def _recv(self) -> dict:
        try:
            line = self._lines.get(timeout=self._timeout)
        except queue.Empty:
            # A late reply would desync request/response pairing; retire
            # the client rather than risk answering the wrong request.
            self._dead = f"no answer within {self._timeout:.1f}s"
            raise TransportError(
                f"detector did not answer within {self._timeout:.1f}s"
            ) from None
        if line is None:
            code = self._proc.poll()
            self._dead = f"process exited (status {code})"
            raise TransportError(f"detector process exited (status {code})")
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"detector wrote invalid JSON: {line!r}") from exc
        if not isinstance(msg, dict):
            raise ProtocolError(f"expected a JSON object, got: {line!r}")
        return msg

    def detect(self, image: np.ndarray | None, image_path: str | None) -> DetectionSet:
        body, req_id = _detect_body(image, image_path)
        with self._lock:
            if self._dead:
                raise TransportError(f"detector connection retired: {self._dead}")
            self._send(body)
            msg = self._recv()
        return _parse_detect_response(msg, req_id)

    def close(self) -> None:
        try:
            if self._proc.stdin:
                self._proc.stdin.close()
            self._proc.terminate()
            self._proc.wait(timeout=5)
        except (OSError, subprocess.TimeoutExpired):
            self._proc.kill()


class _HttpClient:
    def __init__(self, handle: DetectorHandle):
        self._base = handle.endpoint.rstrip("/")
        self._timeout = handle.timeout_ms / 1000.0
        self._session = requests.Session()
        self._sem = threading.Semaphore(handle.max_concurrency)
        self.info = self._handshake()

    def _handshake(self) -> DetectorInfo:
        try:
            resp = self._session.get(self._base + "/hello", timeout=self._timeout)
        except requests.RequestException as exc:
            raise TransportError(f"hello request failed: {exc}") from exc
        return _parse_hello_ack(self._json_of(resp))

    @staticmethod
    def _json_of(resp) -> dict:
        try:
            msg = resp.json()
        except ValueError as exc:
            raise ProtocolError(f"detector answered non-JSON (HTTP {resp.status_code})") from exc
        if not isinstance(msg, dict):
            raise ProtocolError("expected a JSON object")
        return msg

    def detect(self, image: np.ndarray | None, image_path: str | None) -> DetectionSet:
        body, req_id = _detect_body(image, image_path)
        with self._sem:
            try:
                resp = self._session.post(
                    self._base + "/detect", json=body, timeout=self._timeout
                )
            except requests.Timeout as exc:
                raise TransportError(f"detect timed out after {self._timeout:.1f}s") from exc
            except requests.RequestException as exc:
                raise TransportError(f"detect request failed: {exc}") from exc
        return _parse_detect_response(self._json_of(resp), req_id)

    def close(self) -> None:
        self._session.close()


def _ensure_client(handle: DetectorHandle):
    if handle._client is None:
        if handle.transport == "subprocess":
            handle._client = _SubprocessClient(handle)
        elif handle.transport == "http":
            handle._client = _HttpClient(handle)
        else:
            raise ConfigError("builtin handles have no wire client")
    return handle._client


def handshake(handle: DetectorHandle) -> DetectorInfo:
    """Validate protocol compatibility; metadata is cached on the handle."""
    if handle.transport == "builtin":
        return DetectorInfo(handle.detector_id, PROTOCOL_VERSION, handle.max_concurrency)
    return _ensure_client(handle).info


def detect(
    handle: DetectorHandle,
    image: np.ndarray | None = None,
    *,
    probe: ProbeContext | None = None,
    image_path: str | None = None,
) -> DetectionSet:
    """Run the detector on one image.

    Builtin oracles receive the probe context; external detectors get the
    image by file path when available (default) and inline PNG otherwise.
    """
    if handle.transport == "builtin":
        return _oracle_detect(handle.oracle, image, image_path, probe)
    return _ensure_client(handle).detect(image, image_path)


def close_detector(handle: DetectorHandle) -> None:
    client = handle._client
    handle._client = None
    if client is not None:
        client.close()


def effective_concurrency(handle: DetectorHandle) -> int:
    """Configured limit capped by what the detector announced."""
    if handle.transport == "builtin" or handle._client is None:
        return handle.max_concurrency
    return max(1, min(handle.max_concurrency, handle._client.info.max_concurrency))


def handle_from_dict(raw: dict) -> DetectorHandle:
    """Build a handle from a JSON config fragment."""
    if "detector_id" not in raw:
        raise ConfigError("detector config needs a detector_id")
    oracle = None
    if raw.get("oracle") is not None:
        o = dict(raw["oracle"])
        base = o.pop("base_detection", "default")
        if base == "default":
            base_det = _default_detection()
        elif base is None:
            base_det = None
        else:
            x, y, w, h = (float(v) for v in base["bbox"])
            base_det = Detection(base["class"], BoundingBox(x, y, w, h), float(base["confidence"]))
        band = tuple(o.pop("luminance_band", (0.0, 255.0)))
        oracle = OracleSpec(base_detection=base_det, luminance_band=band, **o)
    timeout_ms = raw.get("timeout_ms", raw.get("timeout", 30000))  # both in ms
    return DetectorHandle(
        detector_id=str(raw["detector_id"]),
        transport=raw.get("transport", "builtin"),
        endpoint=raw.get("endpoint"),
        max_concurrency=int(raw.get("max_concurrency", 1)),
        timeout_ms=int(timeout_ms),
        oracle=oracle,
    )


def handle_to_dict(handle: DetectorHandle) -> dict:
    out: dict = {
        "detector_id": handle.detector_id,
        "transport": handle.transport,
        "max_concurrency": handle.max_concurrency,
        "timeout_ms": handle.timeout_ms,
    }
    if handle.endpoint is not None:
        out["endpoint"] = handle.endpoint
    if handle.oracle is not None:
        spec = handle.oracle
        base = None
        if spec.base_detection is not None:
            b = spec.base_detection
            base = {
                "class": b.class_label,
                "bbox": [b.box.x, b.box.y, b.box.w, b.box.h],
                "confidence": b.confidence,
            }
        out["oracle"] = {
            "kind": spec.kind,
            "fail_threshold": dict(spec.fail_threshold),
            "failure_mode": spec.failure_mode,
            "base_detection": base,
            "confidence_model": spec.confidence_model,
            "luminance_band": list(spec.luminance_band),
        }
    return out
