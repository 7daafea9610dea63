"""Bounding-box algebra and the detection-equivalence predicate.

Two detection results are considered equivalent when their primary
(top-confidence) detections carry the same class label and their boxes
overlap with IoU strictly above the configured tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import WeathergaugeError

__all__ = [
    "BoundingBox",
    "Detection",
    "DetectionSet",
    "EquivalenceConfig",
    "iou",
    "primary_detection",
    "equivalent",
]


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box: top-left corner (x, y), width w, height h, in pixels."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise WeathergaugeError(f"box must have positive extent, got w={self.w} h={self.h}")

    @property
    def area(self) -> float:
        return self.w * self.h


@dataclass(frozen=True)
class Detection:
    class_label: str
    box: BoundingBox
    confidence: float

    def __post_init__(self):
        if not self.class_label:
            raise WeathergaugeError("class_label must be nonempty")
        if not 0.0 <= self.confidence <= 1.0:
            raise WeathergaugeError(f"confidence outside [0, 1]: {self.confidence}")


@dataclass(frozen=True)
class DetectionSet:
    """Unordered collection of detections; may be empty."""

    items: tuple[Detection, ...] = ()

    def __init__(self, items=()):
        object.__setattr__(self, "items", tuple(items))

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)


@dataclass(frozen=True)
class EquivalenceConfig:
    """Overlap tolerance for the equivalence predicate; metric is IoU."""

    delta: float = 0.5
    overlap_metric: str = field(default="iou")

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise WeathergaugeError(f"delta must be in (0, 1), got {self.delta}")
        if self.overlap_metric != "iou":
            raise WeathergaugeError(f"unsupported overlap metric {self.overlap_metric!r}")


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes; 0.0 when disjoint."""
    ix = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    iy = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    if ix <= 0.0 or iy <= 0.0:
        return 0.0
    inter = ix * iy
    union = a.area + b.area - inter
    return inter / union


def primary_detection(ds: DetectionSet) -> Detection | None:
    """Top-1 detection: maximal confidence, deterministic tie-breaking.

    Ties fall through: larger box area, lexicographically smaller class
    label, smaller x, smaller y (then w, h for a total order).
    """
    if not ds.items:
        return None
    return min(
        ds.items,
        key=lambda d: (
            -d.confidence,
            -d.box.area,
            d.class_label,
            d.box.x,
            d.box.y,
            d.box.w,
            d.box.h,
        ),
    )


def equivalent(r: DetectionSet, r_prime: DetectionSet, cfg: EquivalenceConfig) -> bool:
    """True iff both primaries are absent, or classes match and IoU > delta."""
    d = primary_detection(r)
    d_prime = primary_detection(r_prime)
    if d is None and d_prime is None:
        return True
    if d is None or d_prime is None:
        return False
    return d.class_label == d_prime.class_label and iou(d.box, d_prime.box) > cfg.delta
