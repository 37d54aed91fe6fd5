"""Deterministic training loop over the unpaired dataset.

All randomness derives from the config seed: torch init uses it
directly, each replay pool gets its own child stream, and every epoch's
sampling + augmentation stream is derived from (seed, epoch) so a resume
from an epoch-boundary checkpoint replays the exact run.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import torch

from .checkpoint import KIND_CYCLEGAN, check_tensor_names, read_checkpoint, write_checkpoint
from .dataset import DatasetManifest, load_manifest
from .errors import CheckpointError, DomainError, TrainingError
from .nets import CycleGan, DiscriminatorConfig, GeneratorConfig, init_parameters
from .objectives import LossWeights, discriminator_total_loss, generator_total_loss
from .pool import ImagePool
from .raster import Raster, load_raster, resize, save_raster
from .tensors import to_raster, to_tensor

_POOL_A_STREAM = 1
_POOL_B_STREAM = 2
_EPOCH_STREAM = 3


@dataclass(frozen=True)
class TrainConfig:
    epochs_constant: int = 100
    epochs_decay: int = 100
    lr0: float = 2e-4
    adam_beta1: float = 0.5
    adam_beta2: float = 0.999
    batch_size: int = 1
    image_load_size: int = 286
    image_crop_size: int = 256
    pool_capacity: int = 50
    weights: LossWeights = field(default_factory=LossWeights)
    seed: int = 0
    checkpoint_every: int = 25
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    discriminator: DiscriminatorConfig = field(default_factory=DiscriminatorConfig)

    def __post_init__(self):
        if self.epochs_constant < 1 or self.epochs_decay < 0:
            raise DomainError("need epochs_constant >= 1 and epochs_decay >= 0")
        if self.lr0 <= 0:
            raise DomainError(f"lr0 must be positive, got {self.lr0}")
        if self.batch_size < 1:
            raise DomainError("batch_size must be >= 1")
        if not 16 <= self.image_crop_size <= self.image_load_size:
            raise DomainError("need 16 <= crop size <= load size")
        if self.image_crop_size % 4:
            raise DomainError("crop size must be a multiple of 4")
        if self.pool_capacity < 0 or self.checkpoint_every < 1:
            raise DomainError("pool_capacity must be >= 0 and checkpoint_every >= 1")

    @property
    def total_epochs(self) -> int:
        return self.epochs_constant + self.epochs_decay

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(raw: dict) -> "TrainConfig":
        raw = dict(raw)
        raw["weights"] = LossWeights(**raw["weights"])
        raw["generator"] = GeneratorConfig(**raw["generator"])
        raw["discriminator"] = DiscriminatorConfig(**raw["discriminator"])
        return TrainConfig(**raw)


@dataclass
class MetricsRecord:
    epoch: int
    iteration: int
    adv_g: float
    adv_f: float
    cycle_a: float
    cycle_b: float
    idt_a: float
    idt_b: float
    disc_a: float
    disc_b: float
    lr: float
    wall_ms: float

    def to_json_line(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


@dataclass
class TrainState:
    config: TrainConfig
    model: CycleGan
    opt_g: torch.optim.Adam
    opt_d_a: torch.optim.Adam
    opt_d_b: torch.optim.Adam
    pool_a: ImagePool
    pool_b: ImagePool
    epoch: int = 0
    iteration: int = 0


def _pool_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, stream)))


def epoch_rng(seed: int, epoch: int) -> np.random.Generator:
    """The sampling/augmentation stream for one epoch."""
    return np.random.default_rng(np.random.SeedSequence((seed, _EPOCH_STREAM, epoch)))


def init_train_state(cfg: TrainConfig) -> TrainState:
    model = init_parameters(cfg.generator, cfg.discriminator, cfg.seed)
    betas = (cfg.adam_beta1, cfg.adam_beta2)
    return TrainState(
        config=cfg,
        model=model,
        opt_g=torch.optim.Adam(model.generator_params(), lr=cfg.lr0, betas=betas),
        opt_d_a=torch.optim.Adam(model.D_A.parameters(), lr=cfg.lr0, betas=betas),
        opt_d_b=torch.optim.Adam(model.D_B.parameters(), lr=cfg.lr0, betas=betas),
        pool_a=ImagePool(cfg.pool_capacity, _pool_rng(cfg.seed, _POOL_A_STREAM)),
        pool_b=ImagePool(cfg.pool_capacity, _pool_rng(cfg.seed, _POOL_B_STREAM)),
    )


class UnpairedSampler:
    """Epoch-wise without-replacement draws from two unaligned domains.

    Each domain cycles through seeded permutations independently; the
    shorter domain reshuffles whenever it runs out mid-epoch.
    """

    def __init__(self, files_a: list[str], files_b: list[str], rng: np.random.Generator):
        if not files_a or not files_b:
            raise DomainError("both train domains must be non-empty")
        self.rng = rng
        self._a = _DomainCycle(files_a, rng)
        self._b = _DomainCycle(files_b, rng)

    def sample(self) -> tuple[str, str]:
        return self._a.next(), self._b.next()


class _DomainCycle:
    def __init__(self, files: list[str], rng: np.random.Generator):
        self.files = files
        self.rng = rng
        self.order: list[int] = []
        self.pos = 0

    def next(self) -> str:
        if self.pos >= len(self.order):
            self.order = self.rng.permutation(len(self.files)).tolist()
            self.pos = 0
        path = self.files[self.order[self.pos]]
        self.pos += 1
        return path


def augment(
    img: Raster,
    load_size: int,
    crop_size: int,
    rng: np.random.Generator,
    flip: bool = True,
) -> torch.Tensor:
    """Resize, random-crop, maybe mirror, and scale to [-1, 1]."""
    if crop_size > load_size:
        raise DomainError("crop size must not exceed load size")
    scaled = resize(img, load_size)
    if load_size > crop_size:
        y0 = int(rng.integers(0, load_size - crop_size + 1))
        x0 = int(rng.integers(0, load_size - crop_size + 1))
        scaled = Raster(
            np.ascontiguousarray(scaled.data[y0 : y0 + crop_size, x0 : x0 + crop_size])
        )
    tensor = to_tensor(scaled)
    if flip and rng.random() < 0.5:
        tensor = torch.flip(tensor, dims=(-1,))
    return tensor


def learning_rate(epoch: int, cfg: TrainConfig) -> float:
    """Constant lr0, then linear decay toward zero (never reaching it)."""
    if not 0 <= epoch < cfg.total_epochs:
        raise DomainError(f"epoch {epoch} outside [0, {cfg.total_epochs})")
    if epoch < cfg.epochs_constant:
        return cfg.lr0
    return cfg.lr0 * (1.0 - (epoch - cfg.epochs_constant + 1) / (cfg.epochs_decay + 1))


def _set_lr(state: TrainState, lr: float) -> None:
    for opt in (state.opt_g, state.opt_d_a, state.opt_d_b):
        for group in opt.param_groups:
            group["lr"] = lr


def _require_finite(name: str, value: float) -> float:
    if not math.isfinite(value):
        raise TrainingError(f"loss term {name!r} became non-finite ({value})")
    return value


def train_step(state: TrainState, a: torch.Tensor, b: torch.Tensor) -> MetricsRecord:
    """One alternating update: generators jointly, then each discriminator."""
    t0 = time.perf_counter()
    model = state.model

    for p in model.D_A.parameters():
        p.requires_grad_(False)
    for p in model.D_B.parameters():
        p.requires_grad_(False)
    gen_loss = generator_total_loss(model, a, b, state.config.weights)
    terms = {name: _require_finite(name, t.item()) for name, t in gen_loss.terms.items()}
    state.opt_g.zero_grad()
    gen_loss.total.backward()
    state.opt_g.step()
    for p in model.D_A.parameters():
        p.requires_grad_(True)
    for p in model.D_B.parameters():
        p.requires_grad_(True)

    fake_a = torch.stack([state.pool_a.query(img) for img in gen_loss.fake_a.detach()])
    fake_b = torch.stack([state.pool_b.query(img) for img in gen_loss.fake_b.detach()])

    d_a = discriminator_total_loss(model, "D_A", a, fake_a)
    terms["disc_a"] = _require_finite("disc_a", d_a.item())
    state.opt_d_a.zero_grad()
    d_a.backward()
    state.opt_d_a.step()

    d_b = discriminator_total_loss(model, "D_B", b, fake_b)
    terms["disc_b"] = _require_finite("disc_b", d_b.item())
    state.opt_d_b.zero_grad()
    d_b.backward()
    state.opt_d_b.step()

    state.iteration += 1
    return MetricsRecord(
        epoch=state.epoch,
        iteration=state.iteration,
        adv_g=terms["adv_g"],
        adv_f=terms["adv_f"],
        cycle_a=terms["cycle_a"],
        cycle_b=terms["cycle_b"],
        idt_a=terms["idt_a"],
        idt_b=terms["idt_b"],
        disc_a=terms["disc_a"],
        disc_b=terms["disc_b"],
        lr=state.opt_g.param_groups[0]["lr"],
        wall_ms=(time.perf_counter() - t0) * 1000.0,
    )


def iterations_per_epoch(n_a: int, n_b: int, batch_size: int) -> int:
    return math.ceil(max(n_a, n_b) / batch_size)


def _load_batch(
    root: Path, paths: list[str], cfg: TrainConfig, rng: np.random.Generator
) -> torch.Tensor:
    return torch.stack(
        [
            augment(load_raster(root / p), cfg.image_load_size, cfg.image_crop_size, rng)
            for p in paths
        ]
    )


def sample_outputs(
    model: CycleGan, sketches: list[torch.Tensor], out_dir: str | Path
) -> list[Path]:
    """sketch | G(sketch) | F(G(sketch)) triptychs, one PNG per sketch."""
    if not sketches:
        raise DomainError("need at least one fixed sketch")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    with torch.no_grad():
        for i, sketch in enumerate(sketches):
            painting = model.G(sketch.unsqueeze(0)).squeeze(0)
            back = model.F(painting.unsqueeze(0)).squeeze(0)
            panels = [to_raster(t).data for t in (sketch, painting, back)]
            trip = Raster(np.concatenate(panels, axis=1))
            path = out_dir / f"sample_{i:02d}.png"
            save_raster(trip, path)
            written.append(path)
    return written


def _fixed_sketches(root: Path, manifest: DatasetManifest, cfg: TrainConfig) -> list[torch.Tensor]:
    paths = manifest.files_for("a", "test") or manifest.files_for("a", "train")
    return [
        to_tensor(resize(load_raster(root / p), cfg.image_crop_size)) for p in paths[:3]
    ]


def train(
    dataset_root: str | Path,
    cfg: TrainConfig,
    out_dir: str | Path,
    resume: str | Path | None = None,
) -> Path:
    """Run the full schedule; returns the path of the final checkpoint."""
    dataset_root = Path(dataset_root)
    out_dir = Path(out_dir)
    manifest = load_manifest(dataset_root)
    train_a = manifest.files_for("a", "train")
    train_b = manifest.files_for("b", "train")
    if not train_a or not train_b:
        raise DomainError("manifest has an empty train domain")

    if resume is not None:
        state = load_train_checkpoint(resume)
        cfg = state.config
    else:
        state = init_train_state(cfg)

    ckpt_dir = out_dir / "checkpoints"
    ckpt_dir.mkdir(parents=True, exist_ok=True)
    metrics_path = out_dir / "metrics.jsonl"
    sketches = _fixed_sketches(dataset_root, manifest, cfg)
    n_iter = iterations_per_epoch(len(train_a), len(train_b), cfg.batch_size)

    with open(metrics_path, "a" if resume is not None else "w") as metrics_fh:
        for epoch in range(state.epoch, cfg.total_epochs):
            _set_lr(state, learning_rate(epoch, cfg))
            rng = epoch_rng(cfg.seed, epoch)
            sampler = UnpairedSampler(train_a, train_b, rng)
            for _ in range(n_iter):
                pairs = [sampler.sample() for _ in range(cfg.batch_size)]
                a = _load_batch(dataset_root, [p[0] for p in pairs], cfg, rng)
                b = _load_batch(dataset_root, [p[1] for p in pairs], cfg, rng)
                record = train_step(state, a, b)
                metrics_fh.write(record.to_json_line() + "\n")
            state.epoch = epoch + 1
            if state.epoch % cfg.checkpoint_every == 0 or state.epoch == cfg.total_epochs:
                save_train_checkpoint(state, ckpt_dir / f"epoch_{state.epoch}.ckpt")
                save_train_checkpoint(state, ckpt_dir / "latest.ckpt")
                sample_outputs(state.model, sketches, out_dir / "samples" / f"epoch_{state.epoch}")

    return ckpt_dir / "latest.ckpt"


def _optimizer_params(state: TrainState) -> dict[str, list[tuple[str, torch.Tensor]]]:
    """Per-optimizer (param name, tensor) lists, in param-group order."""
    named = {id(p): n for n, p in state.model.named_parameters()}
    out = {}
    for opt_name, opt in (
        ("opt_g", state.opt_g),
        ("opt_d_a", state.opt_d_a),
        ("opt_d_b", state.opt_d_b),
    ):
        params = [p for group in opt.param_groups for p in group["params"]]
        out[opt_name] = [(named[id(p)], p) for p in params]
    return out


def save_train_checkpoint(state: TrainState, path: str | Path) -> None:
    """Everything needed for bit-exact resume: params, moments, pools, RNG."""
    tensors: dict[str, np.ndarray] = {}
    for name, value in state.model.state_dict().items():
        tensors[f"model.{name}"] = value.detach().numpy()

    opt_meta: dict[str, dict] = {}
    for opt_name, opt in (
        ("opt_g", state.opt_g),
        ("opt_d_a", state.opt_d_a),
        ("opt_d_b", state.opt_d_b),
    ):
        steps: dict[str, int] = {}
        for pname, param in _optimizer_params(state)[opt_name]:
            opt_state = opt.state.get(param)
            if opt_state is None:
                continue
            steps[pname] = int(opt_state["step"].item())
            tensors[f"{opt_name}.{pname}.exp_avg"] = opt_state["exp_avg"].detach().numpy()
            tensors[f"{opt_name}.{pname}.exp_avg_sq"] = opt_state["exp_avg_sq"].detach().numpy()
        opt_meta[opt_name] = {"steps": steps}

    for pool_name, pool in (("pool_a", state.pool_a), ("pool_b", state.pool_b)):
        for i, img in enumerate(pool.images):
            tensors[f"{pool_name}.{i}"] = img.numpy()

    header = {
        "model_kind": KIND_CYCLEGAN,
        "config": state.config.to_dict(),
        "epoch": state.epoch,
        "iteration": state.iteration,
        "optimizers": opt_meta,
        "rng": {
            "pool_a": state.pool_a.rng.bit_generator.state,
            "pool_b": state.pool_b.rng.bit_generator.state,
        },
        "pools": {"a": len(state.pool_a), "b": len(state.pool_b)},
    }
    write_checkpoint(path, header, tensors)


def load_train_checkpoint(path: str | Path) -> TrainState:
    path = Path(path)
    header, tensors = read_checkpoint(path)
    if header.get("model_kind") != KIND_CYCLEGAN:
        raise CheckpointError(f"{path}: cannot resume a {header.get('model_kind')!r} checkpoint")
    try:
        cfg = TrainConfig.from_dict(header["config"])
        epoch = int(header["epoch"])
        iteration = int(header["iteration"])
        opt_meta = header["optimizers"]
        rng_meta = header["rng"]
        pool_counts = header["pools"]
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"{path}: incomplete header ({exc})") from exc

    state = init_train_state(cfg)
    state.epoch = epoch
    state.iteration = iteration

    expected = {f"model.{n}" for n in state.model.state_dict()}
    opt_params = _optimizer_params(state)
    for opt_name, meta in opt_meta.items():
        for pname in meta["steps"]:
            expected.add(f"{opt_name}.{pname}.exp_avg")
            expected.add(f"{opt_name}.{pname}.exp_avg_sq")
    for pool_name, count in (("pool_a", pool_counts["a"]), ("pool_b", pool_counts["b"])):
        expected.update(f"{pool_name}.{i}" for i in range(count))
    check_tensor_names(set(tensors), expected, path)

    model_state = {}
    for name, param in state.model.state_dict().items():
        arr = tensors[f"model.{name}"]
        if tuple(arr.shape) != tuple(param.shape):
            raise CheckpointError(
                f"{path}: tensor model.{name} has shape {tuple(arr.shape)}, "
                f"expected {tuple(param.shape)}"
            )
        model_state[name] = torch.from_numpy(arr.copy())
    state.model.load_state_dict(model_state)

    for opt_name, opt in (
        ("opt_g", state.opt_g),
        ("opt_d_a", state.opt_d_a),
        ("opt_d_b", state.opt_d_b),
    ):
        steps = opt_meta[opt_name]["steps"]
        sd = opt.state_dict()
        opt_state = {}
        for idx, (pname, _) in enumerate(opt_params[opt_name]):
            if pname not in steps:
                continue
            opt_state[idx] = {
                "step": torch.tensor(float(steps[pname])),
                "exp_avg": torch.from_numpy(tensors[f"{opt_name}.{pname}.exp_avg"].copy()),
                "exp_avg_sq": torch.from_numpy(tensors[f"{opt_name}.{pname}.exp_avg_sq"].copy()),
            }
        sd["state"] = opt_state
        opt.load_state_dict(sd)

    for pool_name, pool in (("pool_a", state.pool_a), ("pool_b", state.pool_b)):
        count = pool_counts["a" if pool_name == "pool_a" else "b"]
        pool.images = [torch.from_numpy(tensors[f"{pool_name}.{i}"].copy()) for i in range(count)]
        pool.rng.bit_generator.state = rng_meta[pool_name]

    return state
