"""Checkpoint container: one file holding a JSON manifest plus weight blobs.

Layout: 8-byte magic ``HTNNCKPT``, little-endian uint32 manifest length,
UTF-8 JSON manifest, then the tensors as raw little-endian float32 blobs in
manifest order. The manifest records the model description, training
metadata (epoch, metrics, seeds) and the conventions needed to reproduce
evaluation (transform normalization, RNG family).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .network import ModelSpec, Network
from .quantum import RNG_FAMILY

__all__ = ["MAGIC", "FORMAT_VERSION", "Checkpoint", "save_checkpoint", "load_checkpoint"]

MAGIC = b"HTNNCKPT"
FORMAT_VERSION = 1

CONVENTIONS = {"ht_normalization": "folded-inverse", "rng_family": RNG_FAMILY}


@dataclass
class Checkpoint:
    manifest: dict
    state: dict[str, np.ndarray]

    @property
    def model_spec(self) -> ModelSpec:
        return ModelSpec.from_dict(self.manifest["model"])

    def build_model(self) -> Network:
        net = self.model_spec.build()
        net.load_state_dict(self.state)
        return net


def save_checkpoint(path, spec: ModelSpec, state: dict[str, np.ndarray], *,
                    epoch: int | None = None, metrics: dict | None = None,
                    seeds: dict | None = None) -> Path:
    tensors = []
    blobs = []
    offset = 0
    for name, value in state.items():
        blob = np.ascontiguousarray(value, dtype="<f4").tobytes()
        tensors.append({"name": name, "shape": list(value.shape), "dtype": "float32",
                        "offset": offset, "nbytes": len(blob)})
        blobs.append(blob)
        offset += len(blob)
    manifest = {
        "format": "htnn-checkpoint",
        "version": FORMAT_VERSION,
        "model": spec.to_dict(),
        "epoch": epoch,
        "metrics": metrics or {},
        "seeds": seeds or {},
        "conventions": dict(CONVENTIONS),
        "tensors": tensors,
    }
    encoded = json.dumps(manifest, sort_keys=True).encode("utf-8")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(encoded)))
        f.write(encoded)
        for blob in blobs:
            f.write(blob)
    return path


def load_checkpoint(path) -> Checkpoint:
    raw = Path(path).read_bytes()
    if raw[:8] != MAGIC:
        raise ValueError(f"{path}: not a checkpoint file (bad magic)")
    (manifest_len,) = struct.unpack("<I", raw[8:12])
    manifest = json.loads(raw[12:12 + manifest_len].decode("utf-8"))
    if manifest.get("version") != FORMAT_VERSION:
        raise ValueError(
            f"{path}: unsupported checkpoint version {manifest.get('version')!r}"
        )
    payload = raw[12 + manifest_len:]
    state = {}
    for t in manifest["tensors"]:
        start, nbytes = t["offset"], t["nbytes"]
        if start + nbytes > len(payload):
            raise ValueError(f"{path}: truncated tensor payload for {t['name']}")
        arr = np.frombuffer(payload[start:start + nbytes], dtype="<f4")
        state[t["name"]] = arr.reshape(t["shape"]).copy()
    return Checkpoint(manifest=manifest, state=state)
