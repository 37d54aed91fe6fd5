"""Shared fixtures: synthetic datasets and the finite-difference oracle."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
from PIL import Image

from shanshui.dataset import DatasetManifest
from shanshui.nets import DiscriminatorConfig, GeneratorConfig, init_parameters
from shanshui.objectives import LossWeights, generator_total_loss
from shanshui.train import TrainConfig


def _outline_image(rng: np.random.Generator, size: int) -> np.ndarray:
    """White canvas with a black outlined shape, like a hand sketch."""
    img = np.full((size, size, 3), 255, dtype=np.uint8)
    yy, xx = np.mgrid[0:size, 0:size]
    kind = rng.integers(0, 3)
    cx, cy = rng.integers(size // 3, 2 * size // 3, 2)
    r = int(rng.integers(size // 6, size // 3))
    if kind == 0:
        dist = np.sqrt((xx - cx) ** 2 + (yy - cy) ** 2)
        mask = np.abs(dist - r) < 1.5
    elif kind == 1:
        inner = (np.abs(xx - cx) < r) & (np.abs(yy - cy) < r)
        core = (np.abs(xx - cx) < r - 2) & (np.abs(yy - cy) < r - 2)
        mask = inner & ~core
    else:
        diag = np.abs(xx - cx) + np.abs(yy - cy)
        mask = np.abs(diag - r) < 2
    img[mask] = 0
    return img


def _gradient_image(rng: np.random.Generator, size: int) -> np.ndarray:
    """Smooth filled gradient, standing in for an ink-wash painting."""
    ramp = np.linspace(30, 225, size)
    horizontal = bool(rng.integers(0, 2))
    base = np.tile(ramp, (size, 1)) if horizontal else np.tile(ramp[:, None], (1, size))
    if rng.integers(0, 2):
        base = base[::-1] if not horizontal else base[:, ::-1]
    img = np.stack(
        [
            np.clip(base * float(rng.uniform(0.6, 1.0)) + float(rng.integers(0, 30)), 0, 255)
            for _ in range(3)
        ],
        axis=2,
    )
    return img.astype(np.uint8)


def make_unpaired_fixture(root: Path, n_per_domain: int = 8, size: int = 64) -> DatasetManifest:
    """Outline shapes (domain A) vs filled gradients (domain B), all train."""
    rng = np.random.default_rng(4242)
    domain_a, domain_b, split = [], [], {}
    for sub in ("trainA", "trainB", "testA", "testB"):
        (root / sub).mkdir(parents=True, exist_ok=True)
    for i in range(n_per_domain):
        rel_a = f"trainA/shape_{i:02d}.png"
        rel_b = f"trainB/wash_{i:02d}.png"
        Image.fromarray(_outline_image(rng, size)).save(root / rel_a)
        Image.fromarray(_gradient_image(rng, size)).save(root / rel_b)
        domain_a.append(rel_a)
        domain_b.append(rel_b)
        split[rel_a] = "train"
        split[rel_b] = "train"
    manifest = DatasetManifest(
        domain_a=domain_a,
        domain_b=domain_b,
        split=split,
        preprocess={"size": size},
        seed=4242,
        created_at="2024-01-01T00:00:00+00:00",
    )
    (root / "manifest.json").write_text(manifest.to_json())
    return manifest


def toy_train_config(**overrides) -> TrainConfig:
    defaults = dict(
        epochs_constant=1,
        epochs_decay=1,
        batch_size=1,
        image_load_size=64,
        image_crop_size=64,
        pool_capacity=4,
        seed=11,
        checkpoint_every=1,
        generator=GeneratorConfig(base_filters=8, n_res_blocks=1),
        discriminator=DiscriminatorConfig(base_filters=8, n_downsample_layers=2),
    )
    defaults.update(overrides)
    return TrainConfig(**defaults)


def finite_difference_check(n_samples: int = 120, seed: int = 0) -> list[dict]:
    """Autograd vs central differences on the tiny double-precision setup.

    Returns one record per sampled generator parameter coordinate with
    the analytic gradient, the finite-difference estimate, and their
    floored relative error.
    """
    model = init_parameters(
        GeneratorConfig(base_filters=8, n_res_blocks=1),
        DiscriminatorConfig(base_filters=8, n_downsample_layers=2),
        seed,
    ).double()
    gen = torch.Generator().manual_seed(seed + 1)
    a = torch.rand(1, 3, 16, 16, generator=gen, dtype=torch.float64) * 2 - 1
    b = torch.rand(1, 3, 16, 16, generator=gen, dtype=torch.float64) * 2 - 1
    weights = LossWeights()

    loss = generator_total_loss(model, a, b, weights).total
    loss.backward()

    def loss_value() -> float:
        with torch.no_grad():
            return generator_total_loss(model, a, b, weights).total.item()

    named = list(model.G.named_parameters()) + list(model.F.named_parameters())
    rng = np.random.default_rng(seed + 2)
    coords = [
        (name, p, int(i))
        for name, p in named
        for i in rng.choice(p.numel(), size=min(3, p.numel()), replace=False)
    ]
    rng.shuffle(coords)

    records = []
    for name, param, idx in coords[:n_samples]:
        analytic = param.grad.view(-1)[idx].item()
        flat = param.view(-1)
        with torch.no_grad():
            orig = flat[idx].item()
            h = 1e-5 * max(1.0, abs(orig))
            flat[idx] = orig + h
            upper = loss_value()
            flat[idx] = orig - h
            lower = loss_value()
            flat[idx] = orig
        fd = (upper - lower) / (2.0 * h)
        # Denominator floored at 1e-4: coordinates whose true gradient
        # sits below the FD noise floor are compared absolutely.
        rel = abs(analytic - fd) / max(abs(analytic), abs(fd), 1e-4)
        records.append({"name": name, "idx": idx, "analytic": analytic, "fd": fd, "rel": rel})
    return records
