"""Pure-numpy pixel kernels (fallback backend).

Every function here has a compiled twin in _core.pyx and the two must
produce byte-identical output. To keep float results bit-equal:

  * all per-sample math is float64 with the same operation order as the
    C code (the extension is compiled with FP contraction off),
  * rounding is floor(x + 0.5) on the non-negative pixel domain
    (== round half away from zero), and
  * blur is exact integer arithmetic (2*sum + n) // (2*n).

Kernels mutate the image in place except box_blur, which returns a new
array.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "reference"


def scale(img: np.ndarray, factor: float) -> None:
    """v' = round(v * factor), clamped."""
    v = img.astype(np.float64)
    out = np.floor(v * factor + 0.5)
    img[...] = np.clip(out, 0.0, 255.0).astype(np.uint8)


def blend_const(img: np.ndarray, cr: float, cg: float, cb: float, frac: float) -> None:
    """v' = round(v + (c - v) * frac) toward the constant color, clamped."""
    v = img.astype(np.float64)
    color = np.array([cr, cg, cb], dtype=np.float64)
    t = (color - v) * frac
    out = np.floor(v + t + 0.5)
    img[...] = np.clip(out, 0.0, 255.0).astype(np.uint8)


def box_blur(img: np.ndarray, radius: int) -> np.ndarray:
    """Mean over a (2r+1)^2 window with clamp-to-edge sampling.

    Integer-exact: 2D box sums via an integral image, single rounded
    division at the end.
    """
    if radius <= 0:
        return img.copy()
    r = int(radius)
    k = 2 * r + 1
    padded = np.pad(img.astype(np.int64), ((r, r), (r, r), (0, 0)), mode="edge")
    ii = padded.cumsum(axis=0).cumsum(axis=1)
    ii = np.pad(ii, ((1, 0), (1, 0), (0, 0)))
    sums = ii[k:, k:] - ii[:-k, k:] - ii[k:, :-k] + ii[:-k, :-k]
    count = k * k
    return ((2 * sums + count) // (2 * count)).astype(np.uint8)


def _offset_round(x: float) -> int:
    # Round half away from zero; streak drift offsets can be negative.
    if x >= 0.0:
        return int(math.floor(x + 0.5))
    return int(math.ceil(x - 0.5))


def _blend_px(img: np.ndarray, x: int, y: int, color, frac: float) -> None:
    for c in range(3):
        v = float(img[y, x, c])
        o = math.floor(v + (color[c] - v) * frac + 0.5)
        img[y, x, c] = 0 if o < 0.0 else (255 if o > 255.0 else int(o))


def draw_streaks(
    img: np.ndarray,
    xs: np.ndarray,
    ys: np.ndarray,
    slope: float,
    length: int,
    frac: float,
    cr: float,
    cg: float,
    cb: float,
) -> None:
    """Rain streaks: 2 px wide, drifting `slope` columns per row."""
    h, w, _ = img.shape
    color = (cr, cg, cb)
    for k in range(len(xs)):
        x0 = int(xs[k])
        y0 = int(ys[k])
        for t in range(length):
            py = y0 + t
            if py < 0 or py >= h:
                continue
            px = x0 + _offset_round(slope * float(t))
            for x in (px, px + 1):
                if 0 <= x < w:
                    _blend_px(img, x, py, color, frac)


def snow_whiten(img: np.ndarray, thr: int, ramp: float, max_frac: float) -> None:
    """Blend bright samples toward white.

    A pixel with integer luminance L (x1000 scale) above thr*1000 is
    blended by max_frac * min(1, (L - thr) / ramp); the ramp keeps the
    response continuous in the threshold instead of switching all
    qualifying pixels at once.
    """
    r = img[:, :, 0].astype(np.int64)
    g = img[:, :, 1].astype(np.int64)
    b = img[:, :, 2].astype(np.int64)
    lum1000 = 299 * r + 587 * g + 114 * b
    thr1000 = int(thr) * 1000
    mask = lum1000 > thr1000
    if not mask.any():
        return
    excess = (lum1000[mask] - thr1000).astype(np.float64) / 1000.0
    frac = max_frac * np.minimum(1.0, excess / ramp)
    vals = img[mask].astype(np.float64)
    t = (255.0 - vals) * frac[:, None]
    out = np.floor(vals + t + 0.5)
    img[mask] = np.clip(out, 0.0, 255.0).astype(np.uint8)


def draw_discs(
    img: np.ndarray, xs: np.ndarray, ys: np.ndarray, radii: np.ndarray, frac: float
) -> None:
    """Snow particles: filled discs blended toward white."""
    h, w, _ = img.shape
    white = (255.0, 255.0, 255.0)
    for k in range(len(xs)):
        x0 = int(xs[k])
        y0 = int(ys[k])
        rad = int(radii[k])
        rr = rad * rad
        for dy in range(-rad, rad + 1):
            py = y0 + dy
            if py < 0 or py >= h:
                continue
            for dx in range(-rad, rad + 1):
                if dx * dx + dy * dy > rr:
                    continue
                px = x0 + dx
                if 0 <= px < w:
                    _blend_px(img, px, py, white, frac)


def shade_quads(img: np.ndarray, quads: np.ndarray, factor: float) -> None:
    """Scale samples inside each convex quad by `factor` (applied per quad)."""
    h, w, _ = img.shape
    px = np.arange(w, dtype=np.float64) + 0.5
    py = np.arange(h, dtype=np.float64) + 0.5
    gx = px[None, :]
    gy = py[:, None]
    for quad in quads:
        pos = np.ones((h, w), dtype=bool)
        neg = np.ones((h, w), dtype=bool)
        for k in range(4):
            xa, ya = quad[k]
            xb, yb = quad[(k + 1) % 4]
            t1 = (xb - xa) * (gy - ya)
            t2 = (yb - ya) * (gx - xa)
            cross = t1 - t2
            pos &= cross >= 0.0
            neg &= cross <= 0.0
        mask = pos | neg
        if not mask.any():
            continue
        vals = img[mask].astype(np.float64)
        out = np.floor(vals * factor + 0.5)
        img[mask] = np.clip(out, 0.0, 255.0).astype(np.uint8)


def radial_flare(img: np.ndarray, cx: float, cy: float, radius: float, amp: float) -> None:
    """Additive light cone: v' = v + round(amp * max(0, 1 - d/radius))."""
    h, w, _ = img.shape
    dx = (np.arange(w, dtype=np.float64) + 0.5) - cx
    dy = (np.arange(h, dtype=np.float64) + 0.5) - cy
    dxx = dx * dx
    dyy = dy * dy
    d = np.sqrt(dxx[None, :] + dyy[:, None])
    fall = 1.0 - d / radius
    add = np.floor(amp * fall + 0.5)
    add[fall <= 0.0] = 0.0
    out = img.astype(np.float64) + add[:, :, None]
    img[...] = np.clip(out, 0.0, 255.0).astype(np.uint8)
