"""Single-file checkpoint format.

Layout: 8 magic bytes, little-endian u32 format version, u64 header
length, a UTF-8 JSON header (config snapshot, counters, RNG states, and
the tensor directory with payload offsets), then the raw tensor payload
as little-endian float32.  The format is self-describing enough for the
inference service to rebuild the deployed generator without touching
training code.
"""

from __future__ import annotations

import json
import os
import struct
from pathlib import Path

import numpy as np
import torch

from .errors import CheckpointError
from .nets import GeneratorConfig, ResnetGenerator

MAGIC = b"SHANSHUI"
VERSION = 1

KIND_CYCLEGAN = "cyclegan"
KIND_IDENTITY = "identity"


def write_checkpoint(path: str | Path, header: dict, tensors: dict[str, np.ndarray]) -> None:
    """Serialize header + float32 tensors; the write is atomic via rename."""
    path = Path(path)
    directory = []
    offset = 0
    blobs = []
    for name, arr in tensors.items():
        arr = np.ascontiguousarray(arr, dtype="<f4")
        blob = arr.tobytes()
        directory.append(
            {"name": name, "shape": list(arr.shape), "offset": offset, "size": len(blob)}
        )
        blobs.append(blob)
        offset += len(blob)

    full_header = dict(header)
    full_header["version"] = VERSION
    full_header["tensors"] = directory
    header_bytes = json.dumps(full_header, sort_keys=True).encode("utf-8")

    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        for blob in blobs:
            fh.write(blob)
    os.replace(tmp, path)


def read_checkpoint(path: str | Path) -> tuple[dict, dict[str, np.ndarray]]:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < len(MAGIC) + 12 or raw[: len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint (bad magic)")
    (version,) = struct.unpack_from("<I", raw, len(MAGIC))
    if version != VERSION:
        raise CheckpointError(
            f"{path}: format version {version} unsupported, this build reads version {VERSION}"
        )
    (header_len,) = struct.unpack_from("<Q", raw, len(MAGIC) + 4)
    header_start = len(MAGIC) + 12
    payload_start = header_start + header_len
    if payload_start > len(raw):
        raise CheckpointError(f"{path}: truncated header")
    try:
        header = json.loads(raw[header_start:payload_start].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: corrupted header ({exc})") from exc
    if header.get("version") != version:
        raise CheckpointError(f"{path}: header/container version mismatch")

    tensors: dict[str, np.ndarray] = {}
    for entry in header.get("tensors", []):
        start = payload_start + entry["offset"]
        end = start + entry["size"]
        if end > len(raw):
            raise CheckpointError(f"{path}: truncated payload for tensor {entry['name']!r}")
        arr = np.frombuffer(raw[start:end], dtype="<f4").reshape(entry["shape"])
        tensors[entry["name"]] = arr
    return header, tensors


def check_tensor_names(found: set[str], expected: set[str], path: Path | str) -> None:
    extra = sorted(found - expected)
    missing = sorted(expected - found)
    if extra or missing:
        parts = []
        if extra:
            parts.append(f"unknown tensors {extra}")
        if missing:
            parts.append(f"missing tensors {missing}")
        raise CheckpointError(f"{path}: {'; '.join(parts)}")


def save_identity_checkpoint(path: str | Path, input_size: int = 256) -> None:
    """Stub checkpoint whose generator is the identity mapping.

    Useful for exercising the service and CLI end to end without a
    trained model.
    """
    write_checkpoint(
        path,
        {"model_kind": KIND_IDENTITY, "epoch": 0, "config": {"image_crop_size": input_size}},
        {},
    )


class GeneratorHandle:
    """The deployed sketch-to-painting mapping loaded from a checkpoint."""

    def __init__(self, net: ResnetGenerator | None, input_size: int, checkpoint_id: str):
        self._net = net
        self.input_size = input_size
        self.checkpoint_id = checkpoint_id
        self.is_identity = net is None

    def translate(self, x: torch.Tensor) -> torch.Tensor:
        """[-1, 1] sketch tensor (3, H, W) to [-1, 1] painting tensor."""
        if self._net is None:
            return x
        with torch.no_grad():
            return self._net(x.unsqueeze(0)).squeeze(0)


def load_generator(path: str | Path) -> GeneratorHandle:
    """Rebuild generator G from a checkpoint for inference."""
    import hashlib

    path = Path(path)
    header, tensors = read_checkpoint(path)
    checkpoint_id = hashlib.sha256(path.read_bytes()).hexdigest()[:12]
    config = header.get("config", {})
    input_size = int(config.get("image_crop_size", 256))

    kind = header.get("model_kind", KIND_CYCLEGAN)
    if kind == KIND_IDENTITY:
        return GeneratorHandle(None, input_size, checkpoint_id)
    if kind != KIND_CYCLEGAN:
        raise CheckpointError(f"{path}: unknown model kind {kind!r}")

    try:
        g_cfg = GeneratorConfig(**config["generator"])
    except (KeyError, TypeError) as exc:
        raise CheckpointError(f"{path}: missing generator config ({exc})") from exc
    with torch.random.fork_rng():
        net = ResnetGenerator(g_cfg)
    expected = {f"model.G.{name}" for name in net.state_dict()}
    found = {name for name in tensors if name.startswith("model.G.")}
    check_tensor_names(found, expected, path)

    state = {}
    for name, param in net.state_dict().items():
        arr = tensors[f"model.G.{name}"]
        if tuple(arr.shape) != tuple(param.shape):
            raise CheckpointError(
                f"{path}: tensor model.G.{name} has shape {tuple(arr.shape)}, "
                f"expected {tuple(param.shape)}"
            )
        state[name] = torch.from_numpy(arr.copy())
    net.load_state_dict(state)
    net.eval()
    return GeneratorHandle(net, input_size, checkpoint_id)
