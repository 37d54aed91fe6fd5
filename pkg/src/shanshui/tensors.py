"""Conversions between 8-bit rasters and [-1, 1] model tensors."""

from __future__ import annotations

import numpy as np
import torch

from .raster import Raster


def to_tensor(img: Raster) -> torch.Tensor:
    """Channel-major float32 in [-1, 1]; grayscale replicates to 3 channels."""
    data = img.data
    if data.shape[2] == 1:
        data = np.repeat(data, 3, axis=2)
    scaled = data.astype(np.float32) / 127.5 - 1.0
    return torch.from_numpy(np.ascontiguousarray(scaled.transpose(2, 0, 1)))


def to_raster(tensor: torch.Tensor) -> Raster:
    """Denormalize via (v + 1) * 127.5, rounded half-up and clamped to [0, 255]."""
    if tensor.dim() == 4:
        if tensor.shape[0] != 1:
            raise ValueError(f"expected a single image, got batch of {tensor.shape[0]}")
        tensor = tensor[0]
    arr = tensor.detach().to(torch.float64).cpu().numpy()
    arr = np.floor((arr + 1.0) * 127.5 + 0.5)
    arr = np.clip(arr, 0, 255).astype(np.uint8)
    return Raster(np.ascontiguousarray(arr.transpose(1, 2, 0)))
