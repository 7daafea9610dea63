"""weathergauge: operational-robustness harness for object detectors.

Synthesizes adverse weather/lighting interference at progressive
strengths, locates each image's first failure coefficient (FFC) against
a detector, and aggregates AFFC statistics and confidence curves.
"""

from .augment import (
    ALL_OPERATORS,
    OperatorKind,
    apply,
    derive_seed,
    kernel_backend,
    smoothness_audit,
    strength_grid,
)
from .geometry import (
    BoundingBox,
    Detection,
    DetectionSet,
    EquivalenceConfig,
    equivalent,
    iou,
    primary_detection,
)

__version__ = "0.1.0"


def __getattr__(name):
    # Heavier layers (search, metrics, detectors, cache, campaign) are
    # reachable as submodules; keep base import light.
    import importlib

    if name in ("search", "metrics", "detectors", "cache", "campaign", "cli"):
        return importlib.import_module(f".{name}", __name__)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")

__all__ = [
    "ALL_OPERATORS",
    "OperatorKind",
    "apply",
    "derive_seed",
    "kernel_backend",
    "smoothness_audit",
    "strength_grid",
    "BoundingBox",
    "Detection",
    "DetectionSet",
    "EquivalenceConfig",
    "equivalent",
    "iou",
    "primary_detection",
    "__version__",
]
