"""Replay buffer of previously generated images for discriminator updates."""

from __future__ import annotations

import numpy as np
import torch


class ImagePool:
    """Bounded history of fakes; half the queries answer with an older one.

    While filling, every query stores its input and returns it.  Once
    full, a query returns the fresh image with probability 0.5, otherwise
    it returns a uniformly chosen stored image and replaces it with the
    fresh one.  Capacity 0 disables the pool.
    """

    def __init__(self, capacity: int, rng: np.random.Generator):
        if capacity < 0:
            raise ValueError(f"capacity must be >= 0, got {capacity}")
        self.capacity = capacity
        self.rng = rng
        self.images: list[torch.Tensor] = []

    def query(self, img: torch.Tensor) -> torch.Tensor:
        if self.capacity == 0:
            return img
        img = img.detach()
        if len(self.images) < self.capacity:
            self.images.append(img.clone())
            return img
        if self.rng.random() < 0.5:
            return img
        idx = int(self.rng.integers(self.capacity))
        out = self.images[idx]
        self.images[idx] = img.clone()
        return out

    def __len__(self) -> int:
        return len(self.images)
