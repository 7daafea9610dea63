"""Exception hierarchy for the harness."""

from __future__ import annotations


class WeathergaugeError(Exception):
    """Base class for all harness errors."""


class ImageError(WeathergaugeError):
    """Raster is structurally invalid (shape, dtype, channel count)."""


class StrengthError(WeathergaugeError, ValueError):
    """Interference strength outside [0, 1]."""


class GridError(WeathergaugeError):
    """Strength grid configuration is invalid (step does not divide 1)."""


class ContractError(WeathergaugeError):
    """A caller-guaranteed precondition does not hold."""


class ProbeError(WeathergaugeError):
    """A detector probe failed; carries the strength being probed."""

    def __init__(self, message: str, strength: float | None = None):
        super().__init__(message)
        self.strength = strength


class ProtocolError(WeathergaugeError):
    """Malformed wire data from an external detector."""


class HandshakeError(WeathergaugeError):
    """External detector failed to start or announced an incompatible protocol."""


class TransportError(WeathergaugeError):
    """Process or connection level failure (exit, timeout, broken pipe)."""


class AggregationError(WeathergaugeError):
    """Metric aggregation over an invalid result set."""


class ComparisonError(WeathergaugeError):
    """Report bundles are not comparable (mismatched grid, delta or operators)."""


class CacheError(WeathergaugeError):
    """Augmented-image cache I/O failure."""


class CacheIntegrityError(CacheError):
    """Source image does not match the hash recorded in a cache key."""


class ConfigError(WeathergaugeError):
    """Campaign configuration is invalid."""


class DatasetError(WeathergaugeError):
    """Dataset ingestion cannot proceed (e.g. no readable images)."""
