"""Command-line entry point: dataset, train, translate, serve, export.

Option precedence is flag > config file > built-in default.  The config
file is JSON whose keys mirror flag names (underscored).  Exit codes:
0 success, 1 runtime failure, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import CheckpointError, DomainError, FormatError, ShanshuiError

_COMMANDS = ("dataset", "train", "translate", "serve", "export")


def _add_dataset_args(sub):
    sub.add_argument("scan_dir", type=Path, help="directory of painting scans (PNG/JPEG)")
    sub.add_argument("out_dir", type=Path, help="dataset output directory")
    sub.add_argument("--config", type=Path, default=None, help="JSON config file")
    sub.add_argument("--sigma", type=float, default=1.4, help="Gaussian blur std-dev")
    sub.add_argument("--radius", type=int, default=2, help="Gaussian kernel half-width")
    sub.add_argument("--low", type=float, default=40.0, help="hysteresis low threshold")
    sub.add_argument("--high", type=float, default=100.0, help="hysteresis high threshold")
    sub.add_argument("--crop", type=float, default=0.05, help="frame crop fraction per side")
    sub.add_argument("--size", type=int, default=256, help="output image size (square)")
    sub.add_argument("--split", type=float, default=0.8, help="train fraction")
    sub.add_argument("--seed", type=int, default=0, help="split shuffle seed")


def _add_train_args(sub):
    sub.add_argument("dataset_dir", type=Path, help="dataset root with manifest.json")
    sub.add_argument("out_dir", type=Path, help="training output directory")
    sub.add_argument("--config", type=Path, default=None, help="JSON config file")
    sub.add_argument("--epochs-constant", type=int, default=100, help="epochs at constant lr")
    sub.add_argument("--epochs-decay", type=int, default=100, help="epochs of linear lr decay")
    sub.add_argument("--lr", type=float, default=2e-4, help="initial learning rate")
    sub.add_argument("--batch-size", type=int, default=1, help="images per step and domain")
    sub.add_argument("--load-size", type=int, default=286, help="resize before random crop")
    sub.add_argument("--crop-size", type=int, default=256, help="training crop size")
    sub.add_argument("--pool-capacity", type=int, default=50, help="fake-image replay pool size")
    sub.add_argument("--lambda-cycle", type=float, default=10.0, help="cycle loss weight")
    sub.add_argument(
        "--lambda-identity", type=float, default=0.5, help="identity weight as cycle fraction"
    )
    sub.add_argument("--seed", type=int, default=0, help="master seed")
    sub.add_argument("--checkpoint-every", type=int, default=25, help="epochs between checkpoints")
    sub.add_argument("--base-filters", type=int, default=64, help="generator base filters")
    sub.add_argument(
        "--res-blocks", type=int, default=0, help="residual blocks (0: pick from crop size)"
    )
    sub.add_argument("--d-filters", type=int, default=64, help="discriminator base filters")
    sub.add_argument("--d-layers", type=int, default=3, help="discriminator stride-2 layers")
    sub.add_argument("--resume", type=Path, default=None, help="checkpoint to resume from")


def _add_translate_args(sub):
    sub.add_argument("checkpoint", type=Path, help="trained checkpoint")
    sub.add_argument("input", type=Path, help="input sketch PNG")
    sub.add_argument("output", type=Path, help="output painting PNG")
    sub.add_argument("--config", type=Path, default=None, help="JSON config file")
    sub.add_argument("--size", type=int, default=0, help="model input size (0: from checkpoint)")


def _add_serve_args(sub):
    sub.add_argument("--config", type=Path, default=None, help="JSON config file")
    sub.add_argument("--checkpoint", type=Path, default=Path("checkpoints/latest.ckpt"),
                     help="checkpoint to serve")
    sub.add_argument("--host", type=str, default="127.0.0.1", help="listen address")
    sub.add_argument("--port", type=int, default=8000, help="listen port")
    sub.add_argument("--gallery-dir", type=Path, default=Path("gallery"),
                     help="generation record directory")
    sub.add_argument("--queue-capacity", type=int, default=8, help="bounded job queue depth")
    sub.add_argument("--input-size", type=int, default=0,
                     help="model input size (0: from checkpoint)")
    sub.add_argument("--static-dir", type=Path, default=Path("frontend/dist"),
                     help="built drawing client to serve at /")


def _add_export_args(sub):
    sub.add_argument("gallery_dir", type=Path, help="gallery directory")
    sub.add_argument("out_dir", type=Path, help="export output directory")
    sub.add_argument("--config", type=Path, default=None, help="JSON config file")


class _SuppressDefaults:
    """add_argument proxy that hides declared defaults.

    Parsing through this yields only the options the user actually typed,
    which is what the flag > config file > default merge needs.
    """

    def __init__(self, sub: argparse.ArgumentParser):
        self._sub = sub

    def add_argument(self, *args, **kwargs):
        kwargs["default"] = argparse.SUPPRESS
        return self._sub.add_argument(*args, **kwargs)


def build_parser(suppress_defaults: bool = False) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shanshui",
        description="Sketch-to-shanshui pipeline: dataset synthesis, training, and serving.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    adders = {
        "dataset": (_add_dataset_args, "build the unpaired sketch/painting dataset"),
        "train": (_add_train_args, "train the translation model"),
        "translate": (_add_translate_args, "translate one sketch offline"),
        "serve": (_add_serve_args, "run the interactive HTTP service"),
        "export": (_add_export_args, "export the gallery as paired images"),
    }
    for name, (adder, help_text) in adders.items():
        sub = subparsers.add_parser(
            name,
            help=help_text,
            formatter_class=argparse.ArgumentDefaultsHelpFormatter,
        )
        adder(_SuppressDefaults(sub) if suppress_defaults else sub)
    return parser


def _merge_options(argv: list[str]) -> dict:
    """Apply flag > config file > default and return the merged namespace."""
    defaults = vars(build_parser(suppress_defaults=False).parse_args(argv))
    provided = vars(build_parser(suppress_defaults=True).parse_args(argv))

    merged = dict(defaults)
    config_path = provided.get("config", defaults.get("config"))
    if config_path is not None:
        try:
            overrides = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise _UsageError(f"cannot read config file {config_path}: {exc}") from exc
        if not isinstance(overrides, dict):
            raise _UsageError(f"config file {config_path} must hold a JSON object")
        unknown = set(overrides) - set(defaults)
        if unknown:
            raise _UsageError(f"unknown config keys: {sorted(unknown)}")
        merged.update(overrides)
    merged.update(provided)
    return merged


class _UsageError(Exception):
    pass


def cmd_dataset(opts: dict) -> int:
    from .canny import CannyParams
    from .dataset import DatasetConfig, build_dataset
    from .raster import CropSpec

    c = opts["crop"]
    config = DatasetConfig(
        crop=CropSpec(c, c, c, c),
        canny=CannyParams(
            sigma=opts["sigma"],
            radius=opts["radius"],
            low_threshold=opts["low"],
            high_threshold=opts["high"],
        ),
        size=opts["size"],
        split=opts["split"],
        seed=opts["seed"],
    )
    manifest = build_dataset(opts["scan_dir"], opts["out_dir"], config)
    print(opts["out_dir"] / "manifest.json")
    print(
        f"domain A: {len(manifest.domain_a)} sketches, "
        f"domain B: {len(manifest.domain_b)} paintings"
    )
    return 0


def cmd_train(opts: dict) -> int:
    from .nets import DiscriminatorConfig, GeneratorConfig, default_res_blocks
    from .objectives import LossWeights
    from .train import TrainConfig, train

    res_blocks = opts["res_blocks"] or default_res_blocks(opts["crop_size"])
    cfg = TrainConfig(
        epochs_constant=opts["epochs_constant"],
        epochs_decay=opts["epochs_decay"],
        lr0=opts["lr"],
        batch_size=opts["batch_size"],
        image_load_size=opts["load_size"],
        image_crop_size=opts["crop_size"],
        pool_capacity=opts["pool_capacity"],
        weights=LossWeights(opts["lambda_cycle"], opts["lambda_identity"]),
        seed=opts["seed"],
        checkpoint_every=opts["checkpoint_every"],
        generator=GeneratorConfig(opts["base_filters"], res_blocks),
        discriminator=DiscriminatorConfig(opts["d_filters"], opts["d_layers"]),
    )
    final = train(opts["dataset_dir"], cfg, opts["out_dir"], resume=opts["resume"])
    print(final)
    return 0


def cmd_translate(opts: dict) -> int:
    from .checkpoint import load_generator
    from .raster import save_raster
    from .service import ApiError, preprocess_sketch, translate

    handle = load_generator(opts["checkpoint"])
    size = opts["size"] or handle.input_size
    try:
        png_bytes = Path(opts["input"]).read_bytes()
        sketch = preprocess_sketch(png_bytes, size)
    except (OSError, ApiError) as exc:
        raise _UsageError(f"cannot read sketch {opts['input']}: {exc}") from exc
    painting = translate(handle, sketch)
    save_raster(painting, opts["output"])
    print(opts["output"])
    return 0


def cmd_serve(opts: dict) -> int:
    from .service import ServiceConfig, serve

    cfg = ServiceConfig(
        checkpoint=opts["checkpoint"],
        host=opts["host"],
        port=opts["port"],
        input_size=opts["input_size"] or None,
        queue_capacity=opts["queue_capacity"],
        gallery_dir=opts["gallery_dir"],
        static_dir=opts["static_dir"],
    )
    serve(cfg)
    return 0


def cmd_export(opts: dict) -> int:
    from .gallery import export_collection

    written = export_collection(opts["gallery_dir"], opts["out_dir"])
    print(f"{len(written)} pairs -> {opts['out_dir']}")
    return 0


_HANDLERS = {
    "dataset": cmd_dataset,
    "train": cmd_train,
    "translate": cmd_translate,
    "serve": cmd_serve,
    "export": cmd_export,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        opts = _merge_options(argv)
        return _HANDLERS[opts["command"]](opts)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ShanshuiError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 1


if __name__ == "__main__":
    sys.exit(main())
