"""Build the unpaired sketch/painting dataset from a directory of scans.

Each painting scan is cropped, resized, and written to domain B; its
synthetic sketch (edge detection on the processed painting) goes to
domain A.  A manifest at the dataset root records both domains, the
train/test split, and the preprocessing provenance.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .canny import CannyParams, canny
from .errors import DomainError, FormatError
from .raster import CropSpec, Raster, crop_frame, edge_to_sketch, load_raster, resize, save_raster

SCAN_SUFFIXES = {".png", ".jpg", ".jpeg"}
MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class DatasetConfig:
    crop: CropSpec = field(default_factory=lambda: CropSpec(0.05, 0.05, 0.05, 0.05))
    canny: CannyParams = field(default_factory=CannyParams)
    size: int = 256
    split: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.split <= 1:
            raise DomainError(f"split fraction must be in (0, 1], got {self.split}")
        if self.size < 16:
            raise DomainError(f"output size must be >= 16, got {self.size}")


@dataclass(frozen=True)
class DatasetManifest:
    domain_a: list[str]
    domain_b: list[str]
    split: dict[str, str]
    preprocess: dict
    seed: int
    created_at: str

    def files_for(self, domain: str, subset: str) -> list[str]:
        paths = self.domain_a if domain == "a" else self.domain_b
        return [p for p in paths if self.split[p] == subset]

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @staticmethod
    def from_json(text: str) -> "DatasetManifest":
        try:
            raw = json.loads(text)
            manifest = DatasetManifest(
                domain_a=list(raw["domain_a"]),
                domain_b=list(raw["domain_b"]),
                split=dict(raw["split"]),
                preprocess=dict(raw["preprocess"]),
                seed=int(raw["seed"]),
                created_at=str(raw["created_at"]),
            )
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise FormatError(f"invalid manifest: {exc}") from exc
        manifest.validate()
        return manifest

    def validate(self) -> None:
        if not self.domain_a or not self.domain_b:
            raise FormatError("manifest domains must be non-empty")
        all_paths = self.domain_a + self.domain_b
        if len(set(all_paths)) != len(all_paths):
            raise FormatError("manifest paths must be unique")
        missing = [p for p in all_paths if p not in self.split]
        if missing:
            raise FormatError(f"manifest split missing entries for {missing}")

    def validate_files(self, root: Path) -> None:
        missing = [p for p in self.domain_a + self.domain_b if not (root / p).is_file()]
        if missing:
            raise FormatError(f"manifest lists missing files: {missing}")


def load_manifest(root: str | Path) -> DatasetManifest:
    root = Path(root)
    manifest = DatasetManifest.from_json((root / MANIFEST_NAME).read_text())
    manifest.validate_files(root)
    return manifest


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        return datetime.fromtimestamp(int(epoch), tz=timezone.utc).isoformat()
    return datetime.now(tz=timezone.utc).isoformat()


def list_scans(scan_dir: Path) -> list[Path]:
    return sorted(
        p for p in scan_dir.iterdir() if p.is_file() and p.suffix.lower() in SCAN_SUFFIXES
    )


def synthesize_pair(scan: Raster, config: DatasetConfig) -> tuple[Raster, Raster]:
    """(sketch, painting) for one scan: edges are detected on the processed painting."""
    painting = resize(crop_frame(scan, config.crop), config.size)
    edges = canny(painting, CropSpec.none(), config.canny)
    return edge_to_sketch(edges), painting


def build_dataset(
    scan_dir: str | Path,
    out_dir: str | Path,
    config: DatasetConfig,
    created_at: str | None = None,
) -> DatasetManifest:
    scan_dir = Path(scan_dir)
    out_dir = Path(out_dir)
    if not scan_dir.is_dir():
        raise FileNotFoundError(f"scan directory {scan_dir} does not exist")
    scans = list_scans(scan_dir)
    if len(scans) < 2:
        raise DomainError(f"need at least 2 scans in {scan_dir}, found {len(scans)}")

    rng = np.random.default_rng(config.seed)
    order = rng.permutation(len(scans))
    n_train = int(len(scans) * config.split)
    train_indices = set(order[:n_train].tolist())

    for sub in ("trainA", "trainB", "testA", "testB"):
        (out_dir / sub).mkdir(parents=True, exist_ok=True)

    domain_a: list[str] = []
    domain_b: list[str] = []
    split: dict[str, str] = {}
    for i, scan_path in enumerate(scans):
        subset = "train" if i in train_indices else "test"
        sketch, painting = synthesize_pair(load_raster(scan_path), config)
        name = f"{i:04d}_{scan_path.stem}.png"
        rel_a = f"{subset}A/{name}"
        rel_b = f"{subset}B/{name}"
        save_raster(sketch, out_dir / rel_a)
        save_raster(painting, out_dir / rel_b)
        domain_a.append(rel_a)
        domain_b.append(rel_b)
        split[rel_a] = subset
        split[rel_b] = subset

    manifest = DatasetManifest(
        domain_a=domain_a,
        domain_b=domain_b,
        split=split,
        preprocess={
            "canny": asdict(config.canny),
            "crop": asdict(config.crop),
            "size": config.size,
        },
        seed=config.seed,
        created_at=created_at if created_at is not None else _timestamp(),
    )
    (out_dir / MANIFEST_NAME).write_text(manifest.to_json())
    return manifest
