"""Adverse-condition augmentation operators.

Seven operators inject weather/lighting interference into an RGB image
at a continuous strength in [0, 1]:

  fog        blend toward fog gray (200) plus a strength-scaled box blur
  rain       seeded diagonal streaks plus a global dimming factor
  snow       luminance-gated whitening plus seeded disc particles
  shadow     three seeded convex quads, samples scaled by 1 - 0.7*i
  sun_flare  additive radial light cone around a seeded center
  brighten   linear blend toward white
  darken     linear scale toward black

Strength 0 is the identity; strength 1 is the operator's maximal effect.
Output is deterministic in (operator, image, strength, seed), and the
seeded geometry depends only on the seed and image size, never on the
strength.
"""

from __future__ import annotations

import hashlib
import math
from enum import Enum

import numpy as np

from ..errors import GridError, StrengthError
from ..image import require_rgb8
from . import kernels
from ._params import (
    RAIN_STREAKS_PER_MPX,
    SNOW_PARTICLES_PER_MPX,
    flare_center,
    iround,
    rain_geometry,
    shadow_quads,
    snow_geometry,
)

__all__ = [
    "OperatorKind",
    "ALL_OPERATORS",
    "apply",
    "strength_grid",
    "smoothness_audit",
    "derive_seed",
    "kernel_backend",
]

FOG_GRAY = 200.0
FOG_BLUR_DIVISOR = 64
RAIN_COLOR = (210.0, 215.0, 225.0)
RAIN_BLEND = 0.6
RAIN_DIM = 0.15
RAIN_LENGTH_BASE = 10
RAIN_LENGTH_SPAN = 30
SNOW_THRESHOLD_SPAN = 140
SNOW_BLEND = 0.7
SNOW_RAMP = 32.0
SHADOW_DIM = 0.7
FLARE_RADIUS_FRAC = 0.6


class OperatorKind(str, Enum):
    FOG = "fog"
    RAIN = "rain"
    SNOW = "snow"
    SHADOW = "shadow"
    SUN_FLARE = "sun_flare"
    BRIGHTEN = "brighten"
    DARKEN = "darken"

    def __str__(self) -> str:  # keep CSV/CLI rendering plain
        return self.value


ALL_OPERATORS: tuple[OperatorKind, ...] = tuple(OperatorKind)


def kernel_backend() -> str:
    """Name of the active kernel backend ('compiled' or 'reference')."""
    return kernels.BACKEND


def derive_seed(campaign_seed: int, image_id: str, op: OperatorKind) -> int:
    """Stable 64-bit seed for one (campaign, image, operator) triple."""
    payload = f"{campaign_seed}:{image_id}:{OperatorKind(op).value}".encode()
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")


def apply(op: OperatorKind, image: np.ndarray, strength: float, seed: int) -> np.ndarray:
    """Return a new image with the operator applied at the given strength."""
    arr = require_rgb8(image)
    s = float(strength)
    if math.isnan(s) or not 0.0 <= s <= 1.0:
        raise StrengthError(f"strength must be in [0, 1], got {strength}")
    op = OperatorKind(op)
    out = arr.copy()
    if s == 0.0:
        return out
    _DISPATCH[op](out, s, int(seed))
    return out


def _apply_brighten(out: np.ndarray, s: float, seed: int) -> None:
    kernels.blend_const(out, 255.0, 255.0, 255.0, s)


def _apply_darken(out: np.ndarray, s: float, seed: int) -> None:
    kernels.scale(out, 1.0 - s)


def _apply_fog(out: np.ndarray, s: float, seed: int) -> None:
    h, w, _ = out.shape
    kernels.blend_const(out, FOG_GRAY, FOG_GRAY, FOG_GRAY, s)
    radius = iround(s * min(w, h) / FOG_BLUR_DIVISOR)
    if radius > 0:
        out[...] = kernels.box_blur(out, radius)


def _apply_rain(out: np.ndarray, s: float, seed: int) -> None:
    h, w, _ = out.shape
    geo = rain_geometry(seed, w, h)
    n = iround(s * RAIN_STREAKS_PER_MPX * (w * h / 1e6))
    length = RAIN_LENGTH_BASE + iround(RAIN_LENGTH_SPAN * s)
    kernels.draw_streaks(
        out, geo.xs[:n], geo.ys[:n], geo.slope, length, RAIN_BLEND, *RAIN_COLOR
    )
    kernels.scale(out, 1.0 - RAIN_DIM * s)


def _apply_snow(out: np.ndarray, s: float, seed: int) -> None:
    h, w, _ = out.shape
    geo = snow_geometry(seed, w, h)
    thr = 255 - iround(SNOW_THRESHOLD_SPAN * s)
    kernels.snow_whiten(out, thr, SNOW_RAMP, SNOW_BLEND)
    n = iround(s * SNOW_PARTICLES_PER_MPX * (w * h / 1e6))
    kernels.draw_discs(out, geo.xs[:n], geo.ys[:n], geo.radii[:n], SNOW_BLEND)


def _apply_shadow(out: np.ndarray, s: float, seed: int) -> None:
    h, w, _ = out.shape
    kernels.shade_quads(out, shadow_quads(seed, w, h), 1.0 - SHADOW_DIM * s)


def _apply_sun_flare(out: np.ndarray, s: float, seed: int) -> None:
    h, w, _ = out.shape
    cx, cy = flare_center(seed, w, h)
    kernels.radial_flare(out, cx, cy, FLARE_RADIUS_FRAC * min(w, h), 255.0 * s)


_DISPATCH = {
    OperatorKind.FOG: _apply_fog,
    OperatorKind.RAIN: _apply_rain,
    OperatorKind.SNOW: _apply_snow,
    OperatorKind.SHADOW: _apply_shadow,
    OperatorKind.SUN_FLARE: _apply_sun_flare,
    OperatorKind.BRIGHTEN: _apply_brighten,
    OperatorKind.DARKEN: _apply_darken,
}


def strength_grid(step: float) -> list[float]:
    """The probe grid {step, 2*step, ..., 1.0}; baseline 0 is excluded.

    The step must divide 1 exactly (1/step within one ulp of an integer).
    """
    step = float(step)
    if not 0.0 < step <= 0.5:
        raise GridError(f"step must be in (0, 0.5], got {step}")
    inv = 1.0 / step
    n = round(inv)
    if n < 2 or abs(inv - n) > math.ulp(inv):
        raise GridError(f"1/step must be an integer, got 1/{step} = {inv}")
    return [k / n for k in range(1, n + 1)]


def smoothness_audit(
    op: OperatorKind, image: np.ndarray, grid: list[float], seed: int
) -> list[tuple[float, float]]:
    """Mean absolute per-sample change between adjacent grid strengths.

    Returns one (strength, delta) pair per adjacent grid pair, where
    delta is normalized to [0, 1] by dividing by 255 and attributed to
    the upper strength of the pair. Flags operators whose response jumps
    instead of ramping with the strength.
    """
    if not grid:
        raise GridError("smoothness audit requires a nonempty grid")
    arr = require_rgb8(image)
    prev = apply(op, arr, grid[0], seed)
    deltas: list[tuple[float, float]] = []
    for strength in grid[1:]:
        cur = apply(op, arr, strength, seed)
        diff = np.abs(prev.astype(np.int16) - cur.astype(np.int16))
        deltas.append((strength, float(diff.mean()) / 255.0))
        prev = cur
    return deltas
