"""MNIST IDX decoding and the 4-vs-7 binary task.

IDX files are big-endian: a 4-byte magic (0x00000803 for images,
0x00000801 for labels), a 4-byte item count, for images two more 4-byte
extents (rows, cols), then the raw unsigned bytes.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .core import RejectedInput

__all__ = [
    "IMAGE_MAGIC",
    "LABEL_MAGIC",
    "IdxFormatError",
    "BadMagic",
    "TruncatedPayload",
    "CountMismatch",
    "IdxImageSet",
    "BinaryTask",
    "parse_idx_images",
    "parse_idx_labels",
    "serialize_idx_images",
    "serialize_idx_labels",
    "build_4v7",
    "load_4v7",
    "find_mnist_dir",
    "MNIST_FILES",
]

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801

MNIST_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}

NEGATIVE_DIGIT = 4
POSITIVE_DIGIT = 7


class IdxFormatError(RejectedInput):
    pass


class BadMagic(IdxFormatError):
    pass


class TruncatedPayload(IdxFormatError):
    pass


class CountMismatch(IdxFormatError):
    pass


@dataclass(frozen=True)
class IdxImageSet:
    pixels: np.ndarray  # uint8, (count, rows, cols)

    @property
    def count(self) -> int:
        return self.pixels.shape[0]

    @property
    def rows(self) -> int:
        return self.pixels.shape[1]

    @property
    def cols(self) -> int:
        return self.pixels.shape[2]


def _header(blob: bytes, n_ints: int, magic: int, what: str):
    if len(blob) >= 4:
        (found,) = struct.unpack_from(">I", blob)
        if found != magic:
            raise BadMagic(f"{what}: magic 0x{found:08x}, expected 0x{magic:08x}")
    if len(blob) < 4 * n_ints:
        raise TruncatedPayload(f"{what}: header needs {4 * n_ints} bytes, got {len(blob)}")
    return struct.unpack_from(f">{n_ints}I", blob)[1:]


def parse_idx_images(blob: bytes) -> IdxImageSet:
    count, rows, cols = _header(blob, 4, IMAGE_MAGIC, "image file")
    if count == 0:
        raise IdxFormatError("image file declares zero images")
    need = 16 + count * rows * cols
    if len(blob) < need:
        raise TruncatedPayload(f"image file: expected {need} bytes, got {len(blob)}")
    if len(blob) > need:
        raise IdxFormatError(f"image file: {len(blob) - need} trailing bytes after payload")
    pixels = np.frombuffer(blob, dtype=np.uint8, offset=16).reshape(count, rows, cols)
    return IdxImageSet(pixels)


def parse_idx_labels(blob: bytes) -> np.ndarray:
    (count,) = _header(blob, 2, LABEL_MAGIC, "label file")
    if count == 0:
        raise IdxFormatError("label file declares zero labels")
    need = 8 + count
    if len(blob) < need:
        raise TruncatedPayload(f"label file: expected {need} bytes, got {len(blob)}")
    if len(blob) > need:
        raise IdxFormatError(f"label file: {len(blob) - need} trailing bytes after payload")
    return np.frombuffer(blob, dtype=np.uint8, offset=8).copy()


def serialize_idx_images(images: IdxImageSet) -> bytes:
    head = struct.pack(">4I", IMAGE_MAGIC, images.count, images.rows, images.cols)
    return head + np.ascontiguousarray(images.pixels, dtype=np.uint8).tobytes()


def serialize_idx_labels(labels) -> bytes:
    labels = np.asarray(labels, dtype=np.uint8)
    return struct.pack(">2I", LABEL_MAGIC, labels.size) + labels.tobytes()


@dataclass(frozen=True)
class BinaryTask:
    """One partition of the 4-vs-7 task: unit-norm pixel vectors, 7 -> +1 and 4 -> -1."""

    X: np.ndarray
    y: np.ndarray
    split: str
    positive_digit: int = POSITIVE_DIGIT
    negative_digit: int = NEGATIVE_DIGIT

    def __len__(self):
        return len(self.y)


def build_4v7(images: IdxImageSet, labels: np.ndarray, split: str = "train",
              bias: bool = False) -> BinaryTask:
    """Keep the 4s and 7s, scale pixels to [0, 1], and L2-normalise each image.

    With ``bias`` a constant-1 coordinate is appended before normalising, so
    the norm bound still holds.
    """
    labels = np.asarray(labels)
    if images.count != labels.size:
        raise CountMismatch(f"{images.count} images but {labels.size} labels")
    keep = (labels == NEGATIVE_DIGIT) | (labels == POSITIVE_DIGIT)
    if not np.any(labels == NEGATIVE_DIGIT) or not np.any(labels == POSITIVE_DIGIT):
        raise RejectedInput("need at least one 4 and one 7 to build the task")
    X = images.pixels[keep].reshape(int(keep.sum()), -1).astype(np.float64) / 255.0
    if bias:
        X = np.hstack([X, np.ones((X.shape[0], 1))])
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise RejectedInput("blank image cannot be normalised")
    X /= norms
    y = np.where(labels[keep] == POSITIVE_DIGIT, 1, -1).astype(np.int8)
    return BinaryTask(X, y, split)


def find_mnist_dir(explicit: Optional[os.PathLike] = None) -> Optional[Path]:
    """Resolve the MNIST directory from an explicit path or ``$MNIST_DIR``; None if absent."""
    for cand in (explicit, os.environ.get("MNIST_DIR")):
        if cand and all((Path(cand) / f).is_file() for pair in MNIST_FILES.values() for f in pair):
            return Path(cand)
    return None


def load_4v7(mnist_dir, split: str, bias: bool = False) -> BinaryTask:
    try:
        img_name, lbl_name = MNIST_FILES[split]
    except KeyError:
        raise RejectedInput(f"split must be 'train' or 'test', got {split!r}") from None
    root = Path(mnist_dir)
    missing = [n for n in (img_name, lbl_name) if not (root / n).is_file()]
    if missing:
        raise FileNotFoundError(f"missing MNIST files in {root}: {', '.join(missing)}")
    images = parse_idx_images((root / img_name).read_bytes())
    labels = parse_idx_labels((root / lbl_name).read_bytes())
    return build_4v7(images, labels, split, bias=bias)
