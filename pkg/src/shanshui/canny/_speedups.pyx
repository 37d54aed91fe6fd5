# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled edge-detection kernels.

Bit-compatible with shanshui.canny._kernels_np: identical tap order,
identical comparison logic, no reassociation (built with -ffp-contract=off).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()


cdef inline Py_ssize_t _clamp(Py_ssize_t i, Py_ssize_t n) nogil:
    if i < 0:
        return 0
    if i >= n:
        return n - 1
    return i


def gaussian_blur(double[:, ::1] img, double[::1] weights):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef Py_ssize_t taps = weights.shape[0]
    cdef Py_ssize_t r = (taps - 1) // 2
    cdef cnp.ndarray[double, ndim=2] tmp_arr = np.empty((h, w), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] out_arr = np.empty((h, w), dtype=np.float64)
    cdef double[:, ::1] tmp = tmp_arr
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t x, y, i
    cdef double acc

    with nogil:
        for y in range(h):
            for x in range(w):
                acc = weights[0] * img[y, _clamp(x - r, w)]
                for i in range(1, taps):
                    acc += weights[i] * img[y, _clamp(x + i - r, w)]
                tmp[y, x] = acc
        for y in range(h):
            for x in range(w):
                acc = weights[0] * tmp[_clamp(y - r, h), x]
                for i in range(1, taps):
                    acc += weights[i] * tmp[_clamp(y + i - r, h), x]
                out[y, x] = acc
    return out_arr


def sobel_gradients(double[:, ::1] img):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef cnp.ndarray[double, ndim=2] gx_arr = np.empty((h, w), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] gy_arr = np.empty((h, w), dtype=np.float64)
    cdef double[:, ::1] gx = gx_arr
    cdef double[:, ::1] gy = gy_arr
    cdef Py_ssize_t x, y, yu, yd, xl, xr
    cdef double acc

    with nogil:
        for y in range(h):
            yu = _clamp(y - 1, h)
            yd = _clamp(y + 1, h)
            for x in range(w):
                xl = _clamp(x - 1, w)
                xr = _clamp(x + 1, w)

                acc = -1.0 * img[yu, xl]
                acc += 1.0 * img[yu, xr]
                acc += -2.0 * img[y, xl]
                acc += 2.0 * img[y, xr]
                acc += -1.0 * img[yd, xl]
                acc += 1.0 * img[yd, xr]
                gx[y, x] = acc

                acc = -1.0 * img[yu, xl]
                acc += -2.0 * img[yu, x]
                acc += -1.0 * img[yu, xr]
                acc += 1.0 * img[yd, xl]
                acc += 2.0 * img[yd, x]
                acc += 1.0 * img[yd, xr]
                gy[y, x] = acc
    return gx_arr, gy_arr


def non_max_suppression(double[:, ::1] gx, double[:, ::1] gy,
                        double tan_lo, double tan_hi):
    cdef Py_ssize_t h = gx.shape[0], w = gx.shape[1]
    cdef cnp.ndarray[double, ndim=2] mag_arr = np.empty((h, w), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] out_arr = np.zeros((h, w), dtype=np.float64)
    cdef double[:, ::1] mag = mag_arr
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t x, y, dy, dx
    cdef double ax, ay, lo, hi, m
    cdef bint same_sign

    with nogil:
        for y in range(h):
            for x in range(w):
                mag[y, x] = sqrt(gx[y, x] * gx[y, x] + gy[y, x] * gy[y, x])

        for y in range(1, h - 1):
            for x in range(1, w - 1):
                ax = fabs(gx[y, x])
                ay = fabs(gy[y, x])
                lo = tan_lo * ax
                hi = tan_hi * ax
                same_sign = (gx[y, x] * gy[y, x]) >= 0

                if same_sign:
                    if ay <= lo:
                        dy = 0; dx = 1      # 0 degrees
                    elif ay <= hi:
                        dy = 1; dx = 1      # 45 degrees
                    else:
                        dy = 1; dx = 0      # 90 degrees
                else:
                    if ay < lo:
                        dy = 0; dx = 1      # 0 degrees
                    elif ay < hi:
                        dy = 1; dx = -1     # 135 degrees
                    else:
                        dy = 1; dx = 0      # 90 degrees

                m = mag[y, x]
                if m >= mag[y + dy, x + dx] and m >= mag[y - dy, x - dx]:
                    out[y, x] = m
    return out_arr


def hysteresis_threshold(double[:, ::1] mag, double low, double high):
    cdef Py_ssize_t h = mag.shape[0], w = mag.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] edges_arr = np.zeros((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] edges = edges_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=1] stack_arr = np.empty(h * w, dtype=np.int64)
    cdef cnp.int64_t[::1] stack = stack_arr
    cdef Py_ssize_t x, y, nx, ny, top = 0
    cdef cnp.int64_t pos

    with nogil:
        for y in range(h):
            for x in range(w):
                if mag[y, x] >= high:
                    edges[y, x] = 1
                    stack[top] = y * w + x
                    top += 1

        while top > 0:
            top -= 1
            pos = stack[top]
            y = pos // w
            x = pos - y * w
            for ny in range(y - 1, y + 2):
                if ny < 0 or ny >= h:
                    continue
                for nx in range(x - 1, x + 2):
                    if nx < 0 or nx >= w:
                        continue
                    if edges[ny, nx] == 0 and mag[ny, nx] >= low:
                        edges[ny, nx] = 1
                        stack[top] = ny * w + nx
                        top += 1
    return edges_arr
