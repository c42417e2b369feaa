"""MNIST IDX containers and the image pipeline.

The IDX files are big-endian: images carry magic 0x00000803 and a
(count, rows, cols) header, labels carry magic 0x00000801 and a count.
Gzipped files are detected by their two-byte signature and decompressed
transparently.

Pipeline for the digit classifiers: scale intensities to [0, 1], zero-pad
2 pixels on all borders (28x28 -> 32x32), then normalize with mean 0.1307
and standard deviation 0.3081.
"""

from __future__ import annotations

import gzip
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "IMAGES_MAGIC",
    "LABELS_MAGIC",
    "Dataset",
    "read_idx_images",
    "read_idx_labels",
    "write_idx_images",
    "write_idx_labels",
    "mnist_pipeline",
    "load_mnist_idx",
    "default_data_dir",
    "resolve_split",
]

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801

PIXEL_MEAN = 0.1307
PIXEL_STD = 0.3081

DATA_DIR_ENV = "HT_DATA_DIR"

_SPLIT_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}


@dataclass
class Dataset:
    """Preprocessed images (N, 1, H, W) float32 and integer labels (N,)."""

    images: np.ndarray
    labels: np.ndarray

    def __len__(self) -> int:
        return self.images.shape[0]

    def subset(self, n: int | None) -> "Dataset":
        if n is None or n >= len(self):
            return self
        return Dataset(self.images[:n], self.labels[:n])


def _read_bytes(path) -> bytes:
    raw = Path(path).read_bytes()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw


def read_idx_images(path) -> np.ndarray:
    """Raw uint8 image stack (count, rows, cols) from an IDX3 file."""
    raw = _read_bytes(path)
    if len(raw) < 16:
        raise ValueError(f"{path}: truncated IDX image header")
    magic, count, rows, cols = struct.unpack(">IIII", raw[:16])
    if magic != IMAGES_MAGIC:
        raise ValueError(f"{path}: bad IDX image magic 0x{magic:08x}")
    expected = count * rows * cols
    payload = raw[16:]
    if len(payload) < expected:
        raise ValueError(
            f"{path}: truncated payload, expected {expected} bytes, got {len(payload)}"
        )
    return np.frombuffer(payload[:expected], dtype=np.uint8).reshape(count, rows, cols)


def read_idx_labels(path) -> np.ndarray:
    """Raw uint8 labels (count,) from an IDX1 file."""
    raw = _read_bytes(path)
    if len(raw) < 8:
        raise ValueError(f"{path}: truncated IDX label header")
    magic, count = struct.unpack(">II", raw[:8])
    if magic != LABELS_MAGIC:
        raise ValueError(f"{path}: bad IDX label magic 0x{magic:08x}")
    payload = raw[8:]
    if len(payload) < count:
        raise ValueError(
            f"{path}: truncated payload, expected {count} bytes, got {len(payload)}"
        )
    return np.frombuffer(payload[:count], dtype=np.uint8)


def write_idx_images(path, images: np.ndarray):
    images = np.asarray(images, dtype=np.uint8)
    count, rows, cols = images.shape
    data = struct.pack(">IIII", IMAGES_MAGIC, count, rows, cols) + images.tobytes()
    _write_maybe_gz(path, data)


def write_idx_labels(path, labels: np.ndarray):
    labels = np.asarray(labels, dtype=np.uint8)
    data = struct.pack(">II", LABELS_MAGIC, labels.shape[0]) + labels.tobytes()
    _write_maybe_gz(path, data)


def _write_maybe_gz(path, data: bytes):
    path = Path(path)
    if path.suffix == ".gz":
        # fixed mtime keeps the archive byte-stable across rebuilds
        path.write_bytes(gzip.compress(data, mtime=0))
    else:
        path.write_bytes(data)


def mnist_pipeline(images: np.ndarray, pad_to: int = 32,
                   mean: float = PIXEL_MEAN, std: float = PIXEL_STD) -> np.ndarray:
    """uint8 (N, H, W) -> normalized float32 (N, 1, pad_to, pad_to)."""
    n, h, w = images.shape
    if h > pad_to or w > pad_to:
        raise ValueError(f"images {h}x{w} larger than the padded size {pad_to}")
    x = images.astype(np.float32) / 255.0
    top = (pad_to - h) // 2
    left = (pad_to - w) // 2
    x = np.pad(x, ((0, 0), (top, pad_to - h - top), (left, pad_to - w - left)))
    x = (x - mean) / std
    return x[:, None, :, :]


def load_mnist_idx(images_path, labels_path, pad_to: int = 32) -> Dataset:
    """Load an IDX image/label pair and run the digit pipeline."""
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise ValueError(
            f"count mismatch: {images.shape[0]} images vs {labels.shape[0]} labels"
        )
    if images.shape[1:] != (28, 28):
        raise ValueError(f"expected 28x28 images, got {images.shape[1:]}")
    return Dataset(mnist_pipeline(images, pad_to=pad_to), labels.astype(np.int64))


def default_data_dir() -> Path | None:
    env = os.environ.get(DATA_DIR_ENV)
    return Path(env) if env else None


def resolve_split(data_dir, split: str) -> tuple[Path, Path]:
    """Locate the image/label files for ``train`` or ``test`` under a directory."""
    if split not in _SPLIT_FILES:
        raise ValueError(f"unknown split {split!r}")
    base = Path(data_dir)
    out = []
    for stem in _SPLIT_FILES[split]:
        for candidate in (base / stem, base / f"{stem}.gz"):
            if candidate.exists():
                out.append(candidate)
                break
        else:
            raise FileNotFoundError(f"missing {stem}[.gz] under {base}")
    return out[0], out[1]
