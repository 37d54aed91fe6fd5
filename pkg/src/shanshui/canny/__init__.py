"""From-scratch Canny edge detection with swappable kernel backends.

The per-pixel stages (blur, Sobel, non-maximum suppression, hysteresis)
are the hot loops of dataset building, so they exist twice: a compiled
Cython core (``shanshui.canny._speedups``) and a vectorized numpy
fallback.  The backend is chosen once at import; both produce
bit-identical float64 results, which ``tests/test_canny_backends.py``
enforces.  Set ``SHANSHUI_PURE_PYTHON=1`` to force the fallback.

Stage order and conventions:

* kernels are applied as correlations (no flip),
* all convolutions use edge-replicate padding,
* gradient directions quantize to 4 bins with exact-boundary ties going
  to the lower bin, and NMS magnitude ties keep the pixel,
* hysteresis is a full 8-connected transitive closure from strong pixels.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from ..raster import CropSpec, EdgeMap, GrayImage, Raster, crop_frame, to_grayscale

# Direction-bin boundaries as slopes, shared with the compiled core so
# both backends make identical comparisons.
TAN_22_5 = math.tan(math.radians(22.5))
TAN_67_5 = math.tan(math.radians(67.5))

from . import _kernels_np

if os.environ.get("SHANSHUI_PURE_PYTHON"):
    _impl = _kernels_np
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_np


def backend_name() -> str:
    """'compiled' when the Cython core is active, else 'numpy'."""
    return "compiled" if _impl.__name__.endswith("_speedups") else "numpy"


@dataclass(frozen=True)
class CannyParams:
    """Blur scale and hysteresis thresholds (0-255 magnitude scale)."""

    sigma: float = 1.4
    radius: int = 2
    low_threshold: float = 40.0
    high_threshold: float = 100.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        if self.radius < 1:
            raise DomainError(f"radius must be >= 1, got {self.radius}")
        if not 0 <= self.low_threshold < self.high_threshold:
            raise DomainError(
                f"need 0 <= low < high, got low={self.low_threshold} high={self.high_threshold}"
            )


def gaussian_kernel(sigma: float, radius: int) -> np.ndarray:
    """Normalized 1-D Gaussian, length 2*radius + 1.

    Weights are evaluated with scalar math.exp so the kernel is
    reproducible independent of numpy's vectorized transcendentals.
    """
    if sigma <= 0 or radius < 1:
        raise DomainError("need sigma > 0 and radius >= 1")
    w = np.array(
        [math.exp(-(x * x) / (2.0 * sigma * sigma)) for x in range(-radius, radius + 1)],
        dtype=np.float64,
    )
    return w / w.sum()


def gaussian_blur(img: GrayImage, params: CannyParams) -> GrayImage:
    """Separable Gaussian smoothing: horizontal pass, then vertical."""
    img = np.ascontiguousarray(img, dtype=np.float64)
    weights = gaussian_kernel(params.sigma, params.radius)
    return np.asarray(_impl.gaussian_blur(img, weights))


def sobel_gradients(img: GrayImage) -> tuple[GrayImage, GrayImage]:
    """Horizontal/vertical Sobel derivatives with replicate padding."""
    img = np.ascontiguousarray(img, dtype=np.float64)
    if img.shape[0] < 3 or img.shape[1] < 3:
        raise DomainError(f"sobel needs at least 3x3, got {img.shape[1]}x{img.shape[0]}")
    gx, gy = _impl.sobel_gradients(img)
    return np.asarray(gx), np.asarray(gy)


def non_max_suppression(gx: GrayImage, gy: GrayImage) -> GrayImage:
    """Keep gradient magnitudes that are local maxima along their direction bin."""
    gx = np.ascontiguousarray(gx, dtype=np.float64)
    gy = np.ascontiguousarray(gy, dtype=np.float64)
    if gx.shape != gy.shape:
        raise DomainError(f"gradient shapes differ: {gx.shape} vs {gy.shape}")
    return np.asarray(_impl.non_max_suppression(gx, gy, TAN_22_5, TAN_67_5))


def hysteresis_threshold(suppressed: GrayImage, params: CannyParams) -> EdgeMap:
    """Double threshold plus 8-connected closure from strong pixels."""
    suppressed = np.ascontiguousarray(suppressed, dtype=np.float64)
    out = _impl.hysteresis_threshold(
        suppressed, float(params.low_threshold), float(params.high_threshold)
    )
    return np.asarray(out, dtype=np.uint8)


def canny(img: Raster, crop: CropSpec, params: CannyParams) -> EdgeMap:
    """Full staged detector: crop, grayscale, blur, Sobel, NMS, hysteresis."""
    gray = to_grayscale(crop_frame(img, crop))
    blurred = gaussian_blur(gray, params)
    gx, gy = sobel_gradients(blurred)
    suppressed = non_max_suppression(gx, gy)
    return hysteresis_threshold(suppressed, params)
