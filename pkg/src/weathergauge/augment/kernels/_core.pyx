# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled pixel kernels (hot-path backend).

Mirrors kernels/reference.py operation for operation. The float
expressions keep the same evaluation order as the numpy code and the
extension is built with -ffp-contract=off, so outputs are byte-identical
between the two backends.
"""

import numpy as np

from libc.math cimport ceil, floor, fmin, sqrt

BACKEND = "compiled"


cdef inline unsigned char _clamp255(double o) nogil:
    if o < 0.0:
        return 0
    if o > 255.0:
        return 255
    return <unsigned char> o


cdef inline void _blend_px(unsigned char[:, :, ::1] img, Py_ssize_t x, Py_ssize_t y,
                           double cr, double cg, double cb, double frac) nogil:
    cdef double v, t, o
    v = <double> img[y, x, 0]
    t = (cr - v) * frac
    o = floor(v + t + 0.5)
    img[y, x, 0] = _clamp255(o)
    v = <double> img[y, x, 1]
    t = (cg - v) * frac
    o = floor(v + t + 0.5)
    img[y, x, 1] = _clamp255(o)
    v = <double> img[y, x, 2]
    t = (cb - v) * frac
    o = floor(v + t + 0.5)
    img[y, x, 2] = _clamp255(o)


def scale(unsigned char[:, :, ::1] img, double factor):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef Py_ssize_t y, x, c
    cdef double v, o
    with nogil:
        for y in range(h):
            for x in range(w):
                for c in range(3):
                    v = <double> img[y, x, c]
                    o = floor(v * factor + 0.5)
                    img[y, x, c] = _clamp255(o)


def blend_const(unsigned char[:, :, ::1] img, double cr, double cg, double cb, double frac):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef Py_ssize_t y, x
    with nogil:
        for y in range(h):
            for x in range(w):
                _blend_px(img, x, y, cr, cg, cb, frac)


def box_blur(unsigned char[:, :, ::1] img, Py_ssize_t radius):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    if radius <= 0:
        return np.asarray(img).copy()
    tmp_arr = np.empty((h, w, 3), dtype=np.int64)
    acc_arr = np.empty((w, 3), dtype=np.int64)
    out_arr = np.empty((h, w, 3), dtype=np.uint8)
    cdef long long[:, :, ::1] tmp = tmp_arr
    cdef long long[:, ::1] acc = acc_arr
    cdef unsigned char[:, :, ::1] out = out_arr
    cdef Py_ssize_t r = radius, y, x, c, j, jj
    cdef long long s, count, denom
    count = <long long> (2 * r + 1) * (2 * r + 1)
    denom = 2 * count
    with nogil:
        # horizontal clamped sliding window sums
        for y in range(h):
            for c in range(3):
                s = 0
                for j in range(-r, r + 1):
                    jj = j
                    if jj < 0:
                        jj = 0
                    if jj > w - 1:
                        jj = w - 1
                    s += img[y, jj, c]
                tmp[y, 0, c] = s
                for x in range(1, w):
                    jj = x - 1 - r
                    if jj < 0:
                        jj = 0
                    s -= img[y, jj, c]
                    jj = x + r
                    if jj > w - 1:
                        jj = w - 1
                    s += img[y, jj, c]
                    tmp[y, x, c] = s
        # vertical clamped sliding window over the row sums
        for x in range(w):
            for c in range(3):
                s = 0
                for j in range(-r, r + 1):
                    jj = j
                    if jj < 0:
                        jj = 0
                    if jj > h - 1:
                        jj = h - 1
                    s += tmp[jj, x, c]
                acc[x, c] = s
        for x in range(w):
            for c in range(3):
                out[0, x, c] = <unsigned char> ((2 * acc[x, c] + count) // denom)
        for y in range(1, h):
            for x in range(w):
                for c in range(3):
                    jj = y - 1 - r
                    if jj < 0:
                        jj = 0
                    acc[x, c] -= tmp[jj, x, c]
                    jj = y + r
                    if jj > h - 1:
                        jj = h - 1
                    acc[x, c] += tmp[jj, x, c]
                    out[y, x, c] = <unsigned char> ((2 * acc[x, c] + count) // denom)
    return out_arr


cdef inline Py_ssize_t _offset_round(double x) nogil:
    if x >= 0.0:
        return <Py_ssize_t> floor(x + 0.5)
    return <Py_ssize_t> ceil(x - 0.5)


def draw_streaks(unsigned char[:, :, ::1] img, long long[::1] xs, long long[::1] ys,
                 double slope, Py_ssize_t length, double frac,
                 double cr, double cg, double cb):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t k, t, px, py, x
    with nogil:
        for k in range(n):
            for t in range(length):
                py = <Py_ssize_t> ys[k] + t
                if py < 0 or py >= h:
                    continue
                px = <Py_ssize_t> xs[k] + _offset_round(slope * <double> t)
                for x in range(px, px + 2):
                    if 0 <= x < w:
                        _blend_px(img, x, py, cr, cg, cb, frac)


def snow_whiten(unsigned char[:, :, ::1] img, long thr, double ramp, double max_frac):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef Py_ssize_t y, x, c
    cdef long long lum, thr1000 = <long long> thr * 1000
    cdef double e, f, v, t, o
    with nogil:
        for y in range(h):
            for x in range(w):
                lum = (299 * <long long> img[y, x, 0]
                       + 587 * <long long> img[y, x, 1]
                       + 114 * <long long> img[y, x, 2])
                if lum > thr1000:
                    e = (<double> (lum - thr1000)) / 1000.0
                    f = max_frac * fmin(1.0, e / ramp)
                    for c in range(3):
                        v = <double> img[y, x, c]
                        t = (255.0 - v) * f
                        o = floor(v + t + 0.5)
                        img[y, x, c] = _clamp255(o)


def draw_discs(unsigned char[:, :, ::1] img, long long[::1] xs, long long[::1] ys,
               long long[::1] radii, double frac):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t k, dx, dy, px, py, rad
    cdef long long rr
    with nogil:
        for k in range(n):
            rad = <Py_ssize_t> radii[k]
            rr = <long long> rad * rad
            for dy in range(-rad, rad + 1):
                py = <Py_ssize_t> ys[k] + dy
                if py < 0 or py >= h:
                    continue
                for dx in range(-rad, rad + 1):
                    if dx * dx + dy * dy > rr:
                        continue
                    px = <Py_ssize_t> xs[k] + dx
                    if 0 <= px < w:
                        _blend_px(img, px, py, 255.0, 255.0, 255.0, frac)


def shade_quads(unsigned char[:, :, ::1] img, double[:, :, ::1] quads, double factor):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef Py_ssize_t q, k, y, x, c
    cdef double px, py, xa, ya, xb, yb, t1, t2, cross, v, o
    cdef bint pos, neg
    cdef Py_ssize_t nq = quads.shape[0]
    with nogil:
        for q in range(nq):
            for y in range(h):
                py = <double> y + 0.5
                for x in range(w):
                    px = <double> x + 0.5
                    pos = True
                    neg = True
                    for k in range(4):
                        xa = quads[q, k, 0]
                        ya = quads[q, k, 1]
                        xb = quads[q, (k + 1) % 4, 0]
                        yb = quads[q, (k + 1) % 4, 1]
                        t1 = (xb - xa) * (py - ya)
                        t2 = (yb - ya) * (px - xa)
                        cross = t1 - t2
                        if not cross >= 0.0:
                            pos = False
                        if not cross <= 0.0:
                            neg = False
                    if pos or neg:
                        for c in range(3):
                            v = <double> img[y, x, c]
                            o = floor(v * factor + 0.5)
                            img[y, x, c] = _clamp255(o)


def radial_flare(unsigned char[:, :, ::1] img, double cx, double cy,
                 double radius, double amp):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef Py_ssize_t y, x, c
    cdef double dx, dy, dxx, dyy, d, fall, add, o
    with nogil:
        for y in range(h):
            dy = (<double> y + 0.5) - cy
            dyy = dy * dy
            for x in range(w):
                dx = (<double> x + 0.5) - cx
                dxx = dx * dx
                d = sqrt(dxx + dyy)
                fall = 1.0 - d / radius
                if fall > 0.0:
                    add = floor(amp * fall + 0.5)
                    for c in range(3):
                        o = <double> img[y, x, c] + add
                        img[y, x, c] = _clamp255(o)
