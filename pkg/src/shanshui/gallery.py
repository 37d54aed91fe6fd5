"""Filesystem gallery of generation records plus the paired export.

Layout: ``<root>/index.json`` and ``<root>/images/<id>_{sketch,painting}.png``.
Image files are written before the index entry, so a crash mid-write can
orphan files but never index a record whose images are missing.  Index
writes replace the file atomically under a lock.
"""

from __future__ import annotations

import json
import threading
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, FormatError
from .raster import Raster, load_raster, resize, save_raster

INDEX_NAME = "index.json"


@dataclass(frozen=True)
class GenerationRecord:
    id: str
    created_at: str
    sketch_path: str
    painting_path: str
    checkpoint_id: str
    latency_ms: float


class Gallery:
    """Journal of interactive generations, newest first."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.images_dir = self.root / "images"
        self.images_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._records: list[GenerationRecord] = []
        index = self.root / INDEX_NAME
        if index.is_file():
            try:
                raw = json.loads(index.read_text())
                self._records = [GenerationRecord(**r) for r in raw["records"]]
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                raise FormatError(f"{index}: invalid gallery index ({exc})") from exc

    def add(self, record: GenerationRecord, sketch_png: bytes, painting_png: bytes) -> None:
        with self._lock:
            if any(r.id == record.id for r in self._records):
                raise DomainError(f"duplicate gallery id {record.id}")
            (self.root / record.sketch_path).write_bytes(sketch_png)
            (self.root / record.painting_path).write_bytes(painting_png)
            self._records.insert(0, record)
            self._write_index()

    def _write_index(self) -> None:
        index = self.root / INDEX_NAME
        tmp = index.with_name(INDEX_NAME + ".tmp")
        tmp.write_text(
            json.dumps({"records": [asdict(r) for r in self._records]}, indent=2, sort_keys=True)
        )
        tmp.replace(index)

    def records(self) -> list[GenerationRecord]:
        with self._lock:
            return list(self._records)

    def __len__(self) -> int:
        return len(self._records)

    def page(self, page: int, page_size: int) -> dict:
        if page < 1 or page_size < 1:
            raise DomainError("page and page_size must be >= 1")
        records = self.records()
        start = (page - 1) * page_size
        return {
            "page": page,
            "page_size": page_size,
            "total": len(records),
            "records": [asdict(r) for r in records[start : start + page_size]],
        }

    def find(self, record_id: str) -> GenerationRecord | None:
        with self._lock:
            return next((r for r in self._records if r.id == record_id), None)

    def image_path(self, record_id: str, kind: str) -> Path | None:
        record = self.find(record_id)
        if record is None or kind not in ("sketch", "painting"):
            return None
        rel = record.sketch_path if kind == "sketch" else record.painting_path
        path = self.root / rel
        return path if path.is_file() else None


def export_collection(gallery_dir: str | Path, out_dir: str | Path) -> list[Path]:
    """Side-by-side sketch|painting pairs plus an index, newest first."""
    gallery = Gallery(gallery_dir)
    records = gallery.records()
    if not records:
        raise DomainError(f"gallery at {gallery_dir} is empty")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    written = []
    entries = []
    for i, record in enumerate(records):
        painting = load_raster(gallery.root / record.painting_path)
        sketch = load_raster(gallery.root / record.sketch_path)
        sketch = resize(sketch, painting.width)
        if sketch.channels != painting.channels:
            data = np.repeat(sketch.data, 3, axis=2) if sketch.channels == 1 else sketch.data
            sketch = Raster(data)
        pair = Raster(np.concatenate([sketch.data, painting.data], axis=1))
        name = f"pair_{i:04d}_{record.id}.png"
        save_raster(pair, out_dir / name)
        written.append(out_dir / name)
        entries.append({"file": name, "id": record.id, "created_at": record.created_at})

    (out_dir / "index.json").write_text(json.dumps({"pairs": entries}, indent=2, sort_keys=True))
    return written
