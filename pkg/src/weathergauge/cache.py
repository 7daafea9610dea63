"""Content-addressed cache of augmented images.

Synthetic images are generated once and reused across detectors and
re-runs. Layout: cache_dir/<pixel sha256>/<operator>/<millis>_<seed>.png
with the strength encoded as an integer count of millistrengths (exact
for the default 0.025 step). Writes are atomic (temp file + rename) so
concurrent generators of the same key converge on one file.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .augment import OperatorKind, apply
from .errors import CacheError, CacheIntegrityError, ConfigError
from .image import pixel_sha256, write_png_atomic

__all__ = ["CacheKey", "ImageCache", "strength_to_millis"]


def strength_to_millis(strength: float) -> int:
    """Exact millistrength encoding; rejects strengths off the millis grid."""
    millis = round(1000.0 * strength)
    if not 0 <= millis <= 1000 or abs(1000.0 * strength - millis) > 1e-6:
        raise ConfigError(
            f"strength {strength} is not a whole number of millistrengths; "
            "use a step that divides 1000 (e.g. 0.025)"
        )
    return millis


@dataclass(frozen=True)
class CacheKey:
    image_sha256: str  # sha256 of the raw row-major RGB samples
    operator: OperatorKind
    strength_millis: int
    seed: int

    def __post_init__(self):
        if not 0 <= self.strength_millis <= 1000:
            raise ConfigError(f"strength_millis outside 0..1000: {self.strength_millis}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed outside u64 range: {self.seed}")

    @classmethod
    def for_strength(
        cls, image_sha256: str, operator: OperatorKind, strength: float, seed: int
    ) -> "CacheKey":
        return cls(image_sha256, OperatorKind(operator), strength_to_millis(strength), int(seed))

    @property
    def strength(self) -> float:
        return self.strength_millis / 1000.0


class ImageCache:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise CacheError(f"cannot create cache dir {self.root}: {exc}") from exc

    def path_for(self, key: CacheKey) -> Path:
        return (
            self.root
            / key.image_sha256
            / key.operator.value
            / f"{key.strength_millis:04d}_{key.seed:016x}.png"
        )

    def get_or_generate(self, key: CacheKey, source: np.ndarray) -> Path:
        """Return the cached file, generating it only when absent.

        Idempotent and byte-stable: regenerating any entry from scratch
        yields identical PNG content.
        """
        if pixel_sha256(source) != key.image_sha256:
            raise CacheIntegrityError(
                f"source image hash does not match cache key {key.image_sha256[:12]}..."
            )
        path = self.path_for(key)
        if path.exists():
            return path
        augmented = apply(key.operator, source, key.strength, key.seed)
        try:
            write_png_atomic(path, augmented)
        except OSError as exc:
            raise CacheError(f"cannot write cache entry {path}: {exc}") from exc
        return path

    def file_count(self) -> int:
        return sum(1 for _ in self.root.rglob("*.png"))
