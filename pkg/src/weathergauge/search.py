"""First-failure-coefficient searches over the strength grid.

A search probes a detector with progressively stronger interference and
returns the smallest grid strength at which the detector's output stops
being equivalent to its clean-image output. The linear sweep makes no
assumptions; the binary variant assumes failures are monotone in
strength and matches the linear result whenever that holds. The
monotonicity audit probes the whole grid and counts fail-then-pass
reversals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .augment import OperatorKind, apply
from .cache import CacheKey, ImageCache
from .detectors import DetectorHandle, ProbeContext, detect
from .errors import (
    ContractError,
    GridError,
    ProbeError,
    ProtocolError,
    TransportError,
)
from .geometry import DetectionSet, EquivalenceConfig, equivalent, primary_detection
from .image import pixel_sha256, read_image, require_rgb8

__all__ = [
    "TraceEntry",
    "FfcResult",
    "MonotonicityAudit",
    "ffc_linear",
    "ffc_binary",
    "monotonicity_audit",
]


@dataclass(frozen=True)
class TraceEntry:
    """One probed strength: did it stay equivalent, and at what confidence.

    confidence is the delta-matched primary detection's confidence, None
    when the probe failed the equivalence check or detected nothing.
    """

    strength: float
    equivalent: bool
    confidence: float | None


@dataclass(frozen=True)
class FfcResult:
    image_id: str
    operator: OperatorKind
    ffc: float
    censored: bool
    probes: int
    trace: tuple[TraceEntry, ...]


@dataclass(frozen=True)
class MonotonicityAudit:
    """Full-grid sweep: per-strength pass pattern plus reversal count."""

    pattern: tuple[bool, ...]
    violations: int
    result: FfcResult


def _validate_grid(grid: list[float]) -> None:
    if not grid:
        raise GridError("search grid is empty")
    prev = 0.0
    for s in grid:
        if not prev < s <= 1.0:
            raise GridError(f"grid must be strictly increasing within (0, 1], got {grid}")
        prev = s


class _Prober:
    """Issues baseline/strength probes, optionally through the image cache."""

    def __init__(
        self,
        detector: DetectorHandle,
        image: np.ndarray,
        op: OperatorKind,
        seed: int,
        cache: ImageCache | None,
    ):
        self.detector = detector
        self.image = require_rgb8(image)
        self.op = OperatorKind(op)
        self.seed = int(seed)
        self.cache = cache
        self._sha = pixel_sha256(self.image) if cache is not None else ""

    def probe(self, strength: float) -> DetectionSet:
        ctx = ProbeContext(self.op, strength)
        try:
            if self.cache is not None:
                key = CacheKey.for_strength(self._sha, self.op, strength, self.seed)
                path = self.cache.get_or_generate(key, self.image)
                if self.detector.transport == "builtin":
                    img = None
                    if self.detector.oracle is not None and self.detector.oracle.needs_pixels:
                        img = read_image(path)
                    return detect(self.detector, img, probe=ctx, image_path=path)
                return detect(self.detector, None, probe=ctx, image_path=str(path))
            if strength == 0.0:
                img = self.image
            else:
                img = apply(self.op, self.image, strength, self.seed)
            return detect(self.detector, img, probe=ctx)
        except (TransportError, ProtocolError, ProbeError) as exc:
            raise ProbeError(
                f"probe at strength {strength} failed: {exc}", strength=strength
            ) from exc


def _baseline(prober: _Prober, image_id: str) -> DetectionSet:
    r0 = prober.probe(0.0)
    if primary_detection(r0) is None:
        raise ContractError(
            f"no clean detection for image {image_id!r}; "
            "the caller must exclude images the detector cannot see"
        )
    return r0


def _trace_entry(
    r0: DetectionSet, r: DetectionSet, strength: float, cfg: EquivalenceConfig
) -> TraceEntry:
    ok = equivalent(r0, r, cfg)
    conf = None
    if ok:
        d = primary_detection(r)
        if d is not None:
            conf = d.confidence
    return TraceEntry(strength=strength, equivalent=ok, confidence=conf)


def ffc_linear(
    detector: DetectorHandle,
    image: np.ndarray,
    op: OperatorKind,
    grid: list[float],
    cfg: EquivalenceConfig,
    seed: int,
    *,
    image_id: str = "",
    cache: ImageCache | None = None,
) -> FfcResult:
    """Walk the grid upward and stop at the first non-equivalent probe.

    Returns ffc = 1.0 with censored = True when the whole grid passes.
    """
    _validate_grid(grid)
    prober = _Prober(detector, image, op, seed, cache)
    r0 = _baseline(prober, image_id)
    probes = 1
    trace: list[TraceEntry] = []
    for strength in grid:
        r = prober.probe(strength)
        probes += 1
        entry = _trace_entry(r0, r, strength, cfg)
        trace.append(entry)
        if not entry.equivalent:
            return FfcResult(
                image_id=image_id,
                operator=prober.op,
                ffc=strength,
                censored=False,
                probes=probes,
                trace=tuple(trace),
            )
    return FfcResult(
        image_id=image_id,
        operator=prober.op,
        ffc=1.0,
        censored=True,
        probes=probes,
        trace=tuple(trace),
    )


def ffc_binary(
    detector: DetectorHandle,
    image: np.ndarray,
    op: OperatorKind,
    grid: list[float],
    cfg: EquivalenceConfig,
    seed: int,
    *,
    image_id: str = "",
    cache: ImageCache | None = None,
) -> FfcResult:
    """Lower-bound binary search for the first failing grid index.

    Valid when the detector fails monotonically in strength (the caller
    asserts this); then the result is identical to ffc_linear with at
    most 1 + ceil(log2(len(grid))) + 1 probes.
    """
    _validate_grid(grid)
    prober = _Prober(detector, image, op, seed, cache)
    r0 = _baseline(prober, image_id)
    probes = 1
    trace: list[TraceEntry] = []
    lo = -1  # highest index known to pass (-1: the clean baseline)
    hi = len(grid)  # lowest index known to fail (len: none seen yet)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        r = prober.probe(grid[mid])
        probes += 1
        entry = _trace_entry(r0, r, grid[mid], cfg)
        trace.append(entry)
        if entry.equivalent:
            lo = mid
        else:
            hi = mid
    if hi == len(grid):
        return FfcResult(
            image_id=image_id,
            operator=prober.op,
            ffc=1.0,
            censored=True,
            probes=probes,
            trace=tuple(trace),
        )
    return FfcResult(
        image_id=image_id,
        operator=prober.op,
        ffc=grid[hi],
        censored=False,
        probes=probes,
        trace=tuple(trace),
    )


def monotonicity_audit(
    detector: DetectorHandle,
    image: np.ndarray,
    op: OperatorKind,
    grid: list[float],
    cfg: EquivalenceConfig,
    seed: int,
    *,
    image_id: str = "",
    cache: ImageCache | None = None,
) -> MonotonicityAudit:
    """Probe every grid strength; count fail-then-pass reversals.

    A violation is an index where the pattern flips from failing back to
    passing, contradicting monotonicity of failures. Also yields the
    exhaustive-sweep FfcResult used for confidence curves.
    """
    _validate_grid(grid)
    prober = _Prober(detector, image, op, seed, cache)
    r0 = _baseline(prober, image_id)
    probes = 1
    trace: list[TraceEntry] = []
    for strength in grid:
        r = prober.probe(strength)
        probes += 1
        trace.append(_trace_entry(r0, r, strength, cfg))
    pattern = tuple(entry.equivalent for entry in trace)
    violations = sum(
        1 for k in range(len(pattern) - 1) if not pattern[k] and pattern[k + 1]
    )
    first_fail = next((k for k, ok in enumerate(pattern) if not ok), None)
    if first_fail is None:
        result = FfcResult(image_id, prober.op, 1.0, True, probes, tuple(trace))
    else:
        result = FfcResult(
            image_id, prober.op, grid[first_fail], False, probes, tuple(trace)
        )
    return MonotonicityAudit(pattern=pattern, violations=violations, result=result)
