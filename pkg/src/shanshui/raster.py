"""Decoded images and the pixel-level operations shared by every stage.

A :class:`Raster` is an 8-bit image as it exists on disk; ``GrayImage`` is
the float64 working representation used by the edge detector.  All
resampling in the project (dataset building, augmentation, the inference
service) goes through :func:`resize` so the pipeline has a single bilinear
definition.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DomainError, FormatError

# Float64 H x W array; the working precision of the edge detector.
GrayImage = np.ndarray

# Uint8 H x W array with values in {0, 1}.
EdgeMap = np.ndarray

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class Raster:
    """8-bit image, row-major, 1 (grayscale) or 3 (RGB) channels."""

    data: np.ndarray  # uint8, shape (height, width, channels)

    def __post_init__(self):
        d = self.data
        if d.dtype != np.uint8 or d.ndim != 3:
            raise DomainError("raster data must be uint8 with shape (h, w, c)")
        if d.shape[2] not in (1, 3):
            raise DomainError(f"raster must have 1 or 3 channels, got {d.shape[2]}")
        if d.shape[0] < 1 or d.shape[1] < 1:
            raise DomainError("raster must be at least 1x1")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class CropSpec:
    """Interior crop, either absolute pixels or a fraction of each axis."""

    top: float = 0.0
    bottom: float = 0.0
    left: float = 0.0
    right: float = 0.0
    fractional: bool = True

    def __post_init__(self):
        amounts = (self.top, self.bottom, self.left, self.right)
        if any(a < 0 for a in amounts):
            raise DomainError("crop amounts must be non-negative")
        if self.fractional and any(a > 0.45 for a in amounts):
            raise DomainError("crop fractions must lie in [0, 0.45]")

    @staticmethod
    def none() -> "CropSpec":
        return CropSpec(0.0, 0.0, 0.0, 0.0)

    def in_pixels(self, width: int, height: int) -> tuple[int, int, int, int]:
        """(top, bottom, left, right) pixel amounts for an image size."""
        if self.fractional:
            return (
                int(self.top * height),
                int(self.bottom * height),
                int(self.left * width),
                int(self.right * width),
            )
        return (int(self.top), int(self.bottom), int(self.left), int(self.right))


def _composite_over_white(img: Image.Image) -> Image.Image:
    if img.mode in ("RGBA", "LA", "PA"):
        base = Image.new("RGBA", img.size, (255, 255, 255, 255))
        base.alpha_composite(img.convert("RGBA"))
        return base.convert("RGB")
    if img.mode == "P":
        return _composite_over_white(img.convert("RGBA"))
    if img.mode == "L":
        return img
    return img.convert("RGB")


def load_raster(path: str | Path) -> Raster:
    """Decode a PNG or JPEG file; alpha is composited over white."""
    path = Path(path)
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        img = Image.open(io.BytesIO(raw))
        if img.format not in ("PNG", "JPEG"):
            raise FormatError(f"{path}: unsupported format {img.format!r}")
        img = _composite_over_white(img)
        img.load()
    except FormatError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise FormatError(f"{path}: not a decodable PNG/JPEG ({exc})") from exc
    arr = np.asarray(img, dtype=np.uint8)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return Raster(arr)


def save_raster(img: Raster, path: str | Path) -> None:
    arr = img.data[:, :, 0] if img.channels == 1 else img.data
    Image.fromarray(arr).save(Path(path))


def crop_frame(img: Raster, spec: CropSpec) -> Raster:
    """Remove the mounting frame: keep the interior region of the image."""
    top, bottom, left, right = spec.in_pixels(img.width, img.height)
    new_w = img.width - left - right
    new_h = img.height - top - bottom
    if new_w < 16 or new_h < 16:
        raise DomainError(
            f"crop leaves {new_w}x{new_h}, need at least 16x16 of {img.width}x{img.height}"
        )
    return Raster(np.ascontiguousarray(img.data[top : top + new_h, left : left + new_w]))


def to_grayscale(img: Raster) -> GrayImage:
    """Luminance Y = 0.299 R + 0.587 G + 0.114 B, in float64."""
    data = img.data.astype(np.float64)
    if img.channels == 1:
        return np.ascontiguousarray(data[:, :, 0])
    r, g, b = data[:, :, 0], data[:, :, 1], data[:, :, 2]
    wr, wg, wb = LUMA_WEIGHTS
    return wr * r + wg * g + wb * b


def _resample_axis_coords(n_in: int, n_out: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # Half-pixel-center convention; clamped to the valid range so border
    # pixels replicate.
    src = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0.0, n_in - 1.0)
    i0 = np.floor(src).astype(np.int64)
    i1 = np.minimum(i0 + 1, n_in - 1)
    frac = src - i0
    return i0, i1, frac


def resize(img: Raster, target: int) -> Raster:
    """Bilinear resample to a target x target square."""
    if target < 1:
        raise DomainError(f"resize target must be positive, got {target}")
    if img.width == target and img.height == target:
        return img
    x0, x1, fx = _resample_axis_coords(img.width, target)
    y0, y1, fy = _resample_axis_coords(img.height, target)
    data = img.data.astype(np.float64)
    top = data[y0][:, x0] * (1 - fx)[None, :, None] + data[y0][:, x1] * fx[None, :, None]
    bot = data[y1][:, x0] * (1 - fx)[None, :, None] + data[y1][:, x1] * fx[None, :, None]
    out = top * (1 - fy)[:, None, None] + bot * fy[:, None, None]
    out = np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)
    return Raster(out)


def edge_to_sketch(edges: EdgeMap) -> Raster:
    """Render an edge map as dark ink on white paper, 3-channel."""
    if edges.ndim != 2 or not np.isin(edges, (0, 1)).all():
        raise DomainError("edge map must be 2-D with values in {0, 1}")
    ink = np.where(edges.astype(bool), 0, 255).astype(np.uint8)
    return Raster(np.repeat(ink[:, :, None], 3, axis=2))
