"""Seeded geometry for the stochastic operators.

All geometry (streak anchors, particle centers, shadow quads, flare
center) is a pure function of (seed, width, height) and never of the
interference strength, so a sweep over strengths moves smoothly instead
of re-rolling the scene at every step. Randomness comes exclusively
from random.Random().random(), whose stream is stable across Python
versions; no transcendental functions are used, so coordinates are
bit-identical across platforms.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

# Streak/particle densities are per megapixel at full strength.
RAIN_STREAKS_PER_MPX = 800
SNOW_PARTICLES_PER_MPX = 1500
SHADOW_QUAD_COUNT = 3


def iround(x: float) -> int:
    """Round half away from zero (our fixed rounding rule)."""
    if x >= 0.0:
        return int(math.floor(x + 0.5))
    return int(math.ceil(x - 0.5))


@dataclass(frozen=True)
class RainGeometry:
    xs: np.ndarray  # int64 anchor columns, full-strength count
    ys: np.ndarray  # int64 anchor rows
    slope: float  # horizontal drift per row, shared by all streaks


@dataclass(frozen=True)
class SnowGeometry:
    xs: np.ndarray
    ys: np.ndarray
    radii: np.ndarray  # int64 in {1, 2, 3}


def max_rain_streaks(width: int, height: int) -> int:
    return iround(RAIN_STREAKS_PER_MPX * (width * height / 1e6))


def max_snow_particles(width: int, height: int) -> int:
    return iround(SNOW_PARTICLES_PER_MPX * (width * height / 1e6))


def rain_geometry(seed: int, width: int, height: int) -> RainGeometry:
    rng = random.Random(seed)
    slope = (rng.random() - 0.5) * 0.6
    n = max_rain_streaks(width, height)
    xs = np.empty(n, dtype=np.int64)
    ys = np.empty(n, dtype=np.int64)
    for k in range(n):
        xs[k] = int(rng.random() * width)
        ys[k] = int(rng.random() * height)
    return RainGeometry(xs, ys, slope)


def snow_geometry(seed: int, width: int, height: int) -> SnowGeometry:
    rng = random.Random(seed)
    n = max_snow_particles(width, height)
    xs = np.empty(n, dtype=np.int64)
    ys = np.empty(n, dtype=np.int64)
    radii = np.empty(n, dtype=np.int64)
    for k in range(n):
        xs[k] = int(rng.random() * width)
        ys[k] = int(rng.random() * height)
        radii[k] = 1 + int(rng.random() * 3)
    return SnowGeometry(xs, ys, radii)


def shadow_quads(seed: int, width: int, height: int) -> np.ndarray:
    """Three convex quadrilaterals as a (3, 4, 2) float64 array.

    Each quad takes one vertex on each side of a seeded rectangle, in
    cyclic order (top, right, bottom, left); that construction is convex
    for any vertex placement, with no trigonometry involved.
    """
    rng = random.Random(seed)
    side = min(width, height)
    quads = np.empty((SHADOW_QUAD_COUNT, 4, 2), dtype=np.float64)
    for q in range(SHADOW_QUAD_COUNT):
        cx = rng.random() * width
        cy = rng.random() * height
        hx = (0.08 + 0.17 * rng.random()) * side
        hy = (0.08 + 0.17 * rng.random()) * side
        x0, x1 = cx - hx, cx + hx
        y0, y1 = cy - hy, cy + hy
        u = [0.1 + 0.8 * rng.random() for _ in range(4)]
        quads[q, 0] = (x0 + u[0] * (x1 - x0), y0)
        quads[q, 1] = (x1, y0 + u[1] * (y1 - y0))
        quads[q, 2] = (x1 - u[2] * (x1 - x0), y1)
        quads[q, 3] = (x0, y1 - u[3] * (y1 - y0))
    return quads


def flare_center(seed: int, width: int, height: int) -> tuple[float, float]:
    """Seeded flare center, constrained to the top half of the frame."""
    rng = random.Random(seed)
    return rng.random() * width, rng.random() * (height / 2.0)
