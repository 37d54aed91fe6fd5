"""Loss terms of the unpaired-translation objective."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import torch

from .errors import ShapeError
from .nets import CycleGan


@dataclass(frozen=True)
class LossWeights:
    """lambda_identity is a fraction of lambda_cycle, per reference practice."""

    lambda_cycle: float = 10.0
    lambda_identity: float = 0.5

    def __post_init__(self):
        if self.lambda_cycle < 0 or self.lambda_identity < 0:
            raise ValueError("loss weights must be non-negative")


def lsgan_loss(scores: torch.Tensor, target: float) -> torch.Tensor:
    """Least-squares adversarial loss: mean squared distance to the label."""
    return ((scores - target) ** 2).mean()


def _check_dims(x: torch.Tensor, y: torch.Tensor) -> None:
    if x.shape != y.shape:
        raise ShapeError(f"shape mismatch: {tuple(x.shape)} vs {tuple(y.shape)}")


def cycle_consistency_loss(x: torch.Tensor, x_rec: torch.Tensor, weights: LossWeights) -> torch.Tensor:
    _check_dims(x, x_rec)
    return weights.lambda_cycle * (x - x_rec).abs().mean()


def identity_loss(y: torch.Tensor, g_of_y: torch.Tensor, weights: LossWeights) -> torch.Tensor:
    _check_dims(y, g_of_y)
    return weights.lambda_identity * weights.lambda_cycle * (y - g_of_y).abs().mean()


class GeneratorLoss(NamedTuple):
    total: torch.Tensor
    terms: dict[str, torch.Tensor]
    fake_a: torch.Tensor  # F(b), a fake sketch
    fake_b: torch.Tensor  # G(a), a fake painting


def generator_total_loss(
    model: CycleGan, a: torch.Tensor, b: torch.Tensor, weights: LossWeights
) -> GeneratorLoss:
    """Joint objective for both generators on one (sketch, painting) pair.

    Adversarial terms judge current fakes (no replay pool here), cycle
    terms penalize round trips, identity terms penalize already-in-domain
    inputs.  Discriminator parameters receive no gradients from this loss.
    """
    fake_b = model.G(a)
    fake_a = model.F(b)
    rec_a = model.F(fake_b)
    rec_b = model.G(fake_a)

    terms = {
        "adv_g": lsgan_loss(model.D_B(fake_b), 1.0),
        "adv_f": lsgan_loss(model.D_A(fake_a), 1.0),
        "cycle_a": cycle_consistency_loss(a, rec_a, weights),
        "cycle_b": cycle_consistency_loss(b, rec_b, weights),
        "idt_b": identity_loss(b, model.G(b), weights),
        "idt_a": identity_loss(a, model.F(a), weights),
    }
    total = sum(terms.values())
    return GeneratorLoss(total, terms, fake_a, fake_b)


def discriminator_total_loss(
    model: CycleGan, which: str, real: torch.Tensor, fake: torch.Tensor
) -> torch.Tensor:
    """0.5 * [D(real) vs 1 + D(fake) vs 0]; the fake comes from the replay pool."""
    disc = getattr(model, which)
    real_loss = lsgan_loss(disc(real), 1.0)
    fake_loss = lsgan_loss(disc(fake.detach()), 0.0)
    return 0.5 * (real_loss + fake_loss)
