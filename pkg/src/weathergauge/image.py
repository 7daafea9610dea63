"""8-bit RGB raster helpers: validation, hashing, PNG/JPEG I/O.

Images are plain numpy arrays of shape (height, width, 3), dtype uint8,
C-contiguous. PNG is the lossless cache format; JPEG is accepted for
ingestion only.
"""

from __future__ import annotations

import hashlib
import os
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ImageError

__all__ = [
    "require_rgb8",
    "as_rgb8",
    "pixel_sha256",
    "file_sha256",
    "read_image",
    "write_png",
    "write_png_atomic",
]


def require_rgb8(image: np.ndarray) -> np.ndarray:
    """Validate an (h, w, 3) uint8 raster, returning it C-contiguous."""
    if not isinstance(image, np.ndarray):
        raise ImageError(f"expected numpy array, got {type(image).__name__}")
    if image.dtype != np.uint8:
        raise ImageError(f"expected uint8 samples, got {image.dtype}")
    if image.ndim != 3 or image.shape[2] != 3:
        raise ImageError(f"expected shape (h, w, 3), got {image.shape}")
    if image.shape[0] < 1 or image.shape[1] < 1:
        raise ImageError(f"image dimensions must be >= 1, got {image.shape}")
    return np.ascontiguousarray(image)


def as_rgb8(image: np.ndarray) -> np.ndarray:
    """Coerce integer arrays in range to uint8 and validate."""
    arr = np.asarray(image)
    if arr.dtype != np.uint8:
        if not np.issubdtype(arr.dtype, np.integer):
            raise ImageError(f"expected integer samples, got {arr.dtype}")
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ImageError("samples outside [0, 255]")
        arr = arr.astype(np.uint8)
    return require_rgb8(arr)


def pixel_sha256(image: np.ndarray) -> str:
    """Content hash of the raw row-major RGB samples (format independent)."""
    arr = require_rgb8(image)
    return hashlib.sha256(arr.tobytes()).hexdigest()


def file_sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def read_image(path: str | Path) -> np.ndarray:
    """Load a PNG or JPEG file as an (h, w, 3) uint8 array."""
    path = Path(path)
    try:
        with Image.open(path) as im:
            rgb = im.convert("RGB")
            return require_rgb8(np.asarray(rgb))
    except (OSError, ValueError) as exc:
        raise ImageError(f"cannot read image {path}: {exc}") from exc


def write_png(path: str | Path, image: np.ndarray) -> None:
    arr = require_rgb8(image)
    Image.fromarray(arr, mode="RGB").save(str(path), format="PNG")


def write_png_atomic(path: str | Path, image: np.ndarray) -> None:
    """Write a PNG via temp-file + rename so concurrent writers converge."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    try:
        write_png(tmp, image)
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink(missing_ok=True)
