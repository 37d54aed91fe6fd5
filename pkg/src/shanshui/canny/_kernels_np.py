"""Numpy fallback for the edge-detection kernels.

Accumulation order matches the compiled core tap for tap so the two
backends agree bit-for-bit: taps are summed left-to-right / top-to-bottom,
Sobel taps in kernel row-major order, and direction bins are decided by
slope comparisons rather than atan2.
"""

from __future__ import annotations

import numpy as np

__all__ = ["gaussian_blur", "sobel_gradients", "non_max_suppression", "hysteresis_threshold"]


def gaussian_blur(img: np.ndarray, weights: np.ndarray) -> np.ndarray:
    h, w = img.shape
    r = (len(weights) - 1) // 2

    padded = np.pad(img, ((0, 0), (r, r)), mode="edge")
    tmp = weights[0] * padded[:, 0:w]
    for i in range(1, len(weights)):
        tmp += weights[i] * padded[:, i : i + w]

    padded = np.pad(tmp, ((r, r), (0, 0)), mode="edge")
    out = weights[0] * padded[0:h, :]
    for j in range(1, len(weights)):
        out += weights[j] * padded[j : j + h, :]
    return out


def sobel_gradients(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h, w = img.shape
    p = np.pad(img, 1, mode="edge")

    def win(j, i):
        return p[j : j + h, i : i + w]

    gx = -1.0 * win(0, 0)
    gx += 1.0 * win(0, 2)
    gx += -2.0 * win(1, 0)
    gx += 2.0 * win(1, 2)
    gx += -1.0 * win(2, 0)
    gx += 1.0 * win(2, 2)

    gy = -1.0 * win(0, 0)
    gy += -2.0 * win(0, 1)
    gy += -1.0 * win(0, 2)
    gy += 1.0 * win(2, 0)
    gy += 2.0 * win(2, 1)
    gy += 1.0 * win(2, 2)
    return gx, gy


def non_max_suppression(
    gx: np.ndarray, gy: np.ndarray, tan_lo: float, tan_hi: float
) -> np.ndarray:
    mag = np.sqrt(gx * gx + gy * gy)

    ax = np.abs(gx)
    ay = np.abs(gy)
    lo = tan_lo * ax
    hi = tan_hi * ax
    same_sign = (gx * gy) >= 0

    # theta = atan2(gy, gx) mod 180 quantized to {0, 45, 90, 135} with
    # boundary angles assigned to the lower bin.
    bin0 = np.where(same_sign, ay <= lo, ay < lo)
    bin45 = same_sign & (lo < ay) & (ay <= hi)
    bin90 = np.where(same_sign, ay > hi, ay >= hi)
    bin135 = ~same_sign & (lo <= ay) & (ay < hi)

    c = mag[1:-1, 1:-1]
    keep = (bin0[1:-1, 1:-1] & (c >= mag[1:-1, :-2]) & (c >= mag[1:-1, 2:])) | (
        bin45[1:-1, 1:-1] & (c >= mag[2:, 2:]) & (c >= mag[:-2, :-2])
    ) | (bin90[1:-1, 1:-1] & (c >= mag[2:, 1:-1]) & (c >= mag[:-2, 1:-1])) | (
        bin135[1:-1, 1:-1] & (c >= mag[2:, :-2]) & (c >= mag[:-2, 2:])
    )

    out = np.zeros_like(mag)
    out[1:-1, 1:-1] = np.where(keep, c, 0.0)
    return out


def _dilate8(mask: np.ndarray) -> np.ndarray:
    p = np.pad(mask, 1, mode="constant")
    out = np.zeros_like(mask)
    for dy in (0, 1, 2):
        for dx in (0, 1, 2):
            if dy == 1 and dx == 1:
                continue
            out |= p[dy : dy + mask.shape[0], dx : dx + mask.shape[1]]
    return out


def hysteresis_threshold(mag: np.ndarray, low: float, high: float) -> np.ndarray:
    reachable = mag >= low
    edges = mag >= high
    frontier = edges
    while frontier.any():
        grow = _dilate8(frontier) & reachable & ~edges
        edges = edges | grow
        frontier = grow
    return edges.astype(np.uint8)
