"""Generators and discriminators for unpaired sketch/painting translation.

Residual-block generators with two downsampling and two upsampling
stages, and patch-level discriminators scoring 70x70 receptive fields at
the default depth.  A :class:`CycleGan` bundle owns both directions:
``G`` maps sketches to paintings, ``F`` paintings to sketches, ``D_A``
judges the sketch domain and ``D_B`` the painting domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from .errors import ShapeError

NORM_EPS = 1e-5
INIT_STD = 0.02


@dataclass(frozen=True)
class GeneratorConfig:
    base_filters: int = 64
    n_res_blocks: int = 9
    instance_norm: bool = True

    def __post_init__(self):
        if self.base_filters < 8:
            raise ValueError(f"base_filters must be >= 8, got {self.base_filters}")
        if self.n_res_blocks < 1:
            raise ValueError(f"n_res_blocks must be >= 1, got {self.n_res_blocks}")


@dataclass(frozen=True)
class DiscriminatorConfig:
    base_filters: int = 64
    n_downsample_layers: int = 3

    def __post_init__(self):
        if self.base_filters < 8:
            raise ValueError(f"base_filters must be >= 8, got {self.base_filters}")
        if self.n_downsample_layers < 1:
            raise ValueError(f"need >= 1 downsample layer, got {self.n_downsample_layers}")


def default_res_blocks(image_size: int) -> int:
    """9 residual blocks at 256px and above, 6 below (reference sizing)."""
    return 9 if image_size >= 256 else 6


def _norm(channels: int, enabled: bool) -> nn.Module:
    if not enabled:
        return nn.Identity()
    return nn.InstanceNorm2d(channels, eps=NORM_EPS, affine=True, track_running_stats=False)


class ResnetBlock(nn.Module):
    def __init__(self, channels: int, instance_norm: bool):
        super().__init__()
        self.block = nn.Sequential(
            nn.ReflectionPad2d(1),
            nn.Conv2d(channels, channels, kernel_size=3),
            _norm(channels, instance_norm),
            nn.ReLU(inplace=True),
            nn.ReflectionPad2d(1),
            nn.Conv2d(channels, channels, kernel_size=3),
            _norm(channels, instance_norm),
        )

    def forward(self, x):
        return x + self.block(x)


class ResnetGenerator(nn.Module):
    """7x7 stem, two stride-2 downsamples, residual trunk, mirrored upsample, tanh."""

    def __init__(self, cfg: GeneratorConfig):
        super().__init__()
        bf = cfg.base_filters
        norm = cfg.instance_norm
        layers: list[nn.Module] = [
            nn.ReflectionPad2d(3),
            nn.Conv2d(3, bf, kernel_size=7),
            _norm(bf, norm),
            nn.ReLU(inplace=True),
        ]
        for mult in (1, 2):
            layers += [
                nn.Conv2d(bf * mult, bf * mult * 2, kernel_size=3, stride=2, padding=1),
                _norm(bf * mult * 2, norm),
                nn.ReLU(inplace=True),
            ]
        layers += [ResnetBlock(bf * 4, norm) for _ in range(cfg.n_res_blocks)]
        for mult in (4, 2):
            layers += [
                nn.ConvTranspose2d(
                    bf * mult,
                    bf * mult // 2,
                    kernel_size=3,
                    stride=2,
                    padding=1,
                    output_padding=1,
                ),
                _norm(bf * mult // 2, norm),
                nn.ReLU(inplace=True),
            ]
        layers += [nn.ReflectionPad2d(3), nn.Conv2d(bf, 3, kernel_size=7), nn.Tanh()]
        self.model = nn.Sequential(*layers)

    def forward(self, x):
        h, w = x.shape[-2], x.shape[-1]
        if h % 4 or w % 4 or h < 8 or w < 8:
            raise ShapeError(f"generator input dims must be multiples of 4 (>= 8), got {h}x{w}")
        return self.model(x)


class PatchDiscriminator(nn.Module):
    """4x4 conv stack emitting one unbounded score per receptive-field patch."""

    def __init__(self, cfg: DiscriminatorConfig):
        super().__init__()
        bf = cfg.base_filters
        self.cfg = cfg
        layers: list[nn.Module] = [
            nn.Conv2d(3, bf, kernel_size=4, stride=2, padding=1),
            nn.LeakyReLU(0.2, inplace=True),
        ]
        mult = 1
        for k in range(1, cfg.n_downsample_layers):
            prev, mult = mult, min(2**k, 8)
            layers += [
                nn.Conv2d(bf * prev, bf * mult, kernel_size=4, stride=2, padding=1),
                _norm(bf * mult, True),
                nn.LeakyReLU(0.2, inplace=True),
            ]
        prev, mult = mult, min(2**cfg.n_downsample_layers, 8)
        layers += [
            nn.Conv2d(bf * prev, bf * mult, kernel_size=4, stride=1, padding=1),
            _norm(bf * mult, True),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(bf * mult, 1, kernel_size=4, stride=1, padding=1),
        ]
        self.model = nn.Sequential(*layers)

    def forward(self, x):
        h, w = patch_score_dims(self.cfg, x.shape[-2], x.shape[-1])
        if h < 1 or w < 1:
            raise ShapeError(
                f"input {x.shape[-1]}x{x.shape[-2]} too small for "
                f"{self.cfg.n_downsample_layers}-downsample discriminator"
            )
        return self.model(x)


def patch_score_dims(cfg: DiscriminatorConfig, height: int, width: int) -> tuple[int, int]:
    """Score-map dims from the layer-by-layer conv arithmetic."""

    def conv(n: int, stride: int) -> int:
        return (n + 2 - 4) // stride + 1

    h, w = height, width
    for _ in range(cfg.n_downsample_layers):
        h, w = conv(h, 2), conv(w, 2)
    for _ in range(2):
        h, w = conv(h, 1), conv(w, 1)
    return h, w


def receptive_field(cfg: DiscriminatorConfig) -> int:
    """Input pixels seen by one output score: fold r <- r*s + (k - s) backwards."""
    r = 1
    for _ in range(2):
        r = r * 1 + (4 - 1)
    for _ in range(cfg.n_downsample_layers):
        r = r * 2 + (4 - 2)
    return r


class CycleGan(nn.Module):
    """Both generators and both discriminators as one named-parameter set."""

    def __init__(self, g_cfg: GeneratorConfig, d_cfg: DiscriminatorConfig):
        super().__init__()
        self.g_cfg = g_cfg
        self.d_cfg = d_cfg
        self.G = ResnetGenerator(g_cfg)
        self.F = ResnetGenerator(g_cfg)
        self.D_A = PatchDiscriminator(d_cfg)
        self.D_B = PatchDiscriminator(d_cfg)

    def generator_params(self):
        return list(self.G.parameters()) + list(self.F.parameters())


def init_parameters(
    g_cfg: GeneratorConfig, d_cfg: DiscriminatorConfig, seed: int
) -> CycleGan:
    """Fresh CycleGan with Normal(0, 0.02) weights, unit norm scales, zero offsets.

    All draws come from one explicitly seeded generator; global torch RNG
    state is never touched.
    """
    with torch.random.fork_rng():  # module construction must not disturb global RNG
        model = CycleGan(g_cfg, d_cfg)
    gen = torch.Generator().manual_seed(seed)
    with torch.no_grad():
        for module in model.modules():
            if isinstance(module, (nn.Conv2d, nn.ConvTranspose2d)):
                module.weight.normal_(0.0, INIT_STD, generator=gen)
                if module.bias is not None:
                    module.bias.zero_()
            elif isinstance(module, nn.InstanceNorm2d) and module.affine:
                module.weight.fill_(1.0)
                module.bias.zero_()
    return model


def _run(net: nn.Module, x: torch.Tensor) -> torch.Tensor:
    if x.dim() == 3:
        return net(x.unsqueeze(0)).squeeze(0)
    return net(x)


def generator_forward(model: CycleGan, which: str, x: torch.Tensor) -> torch.Tensor:
    if which not in ("G", "F"):
        raise ValueError(f"generator must be 'G' or 'F', got {which!r}")
    return _run(getattr(model, which), x)


def discriminator_forward(model: CycleGan, which: str, x: torch.Tensor) -> torch.Tensor:
    if which not in ("D_A", "D_B"):
        raise ValueError(f"discriminator must be 'D_A' or 'D_B', got {which!r}")
    return _run(getattr(model, which), x)
