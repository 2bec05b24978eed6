"""Example distributions, the label-flip channel, and batch streams.

Two stream flavours feed the trainer:

* :class:`DistributionStream` draws fresh examples from a distribution and
  flips each label independently on every draw (stream noise).
* :class:`DatasetStream` samples rows with replacement from a fixed array,
  whose labels may have been corrupted once up front (dataset noise).

Both pull randomness in fixed-size chunks from their own generator, so a
stream is fully determined by its seed and the sequence of batch sizes asked
of it.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import LabeledExample, NoiseSpec, RejectedInput, signs

__all__ = [
    "MAX_PROPOSALS",
    "SamplingError",
    "MarginDistribution",
    "BasisDistribution",
    "random_w_star",
    "random_sign_vector",
    "uniform_ball",
    "sample_margin",
    "sample_basis",
    "flip_noise",
    "flip_labels",
    "DistributionStream",
    "DatasetStream",
    "write_dataset_csv",
    "read_dataset_csv",
]

MAX_PROPOSALS = 10**6


class SamplingError(RuntimeError):
    """Rejection sampling gave up before finding an acceptable point."""


def uniform_ball(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` points uniform in the closed unit ball of R^d (Gaussian direction, U^(1/d) radius)."""
    g = rng.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    # a zero Gaussian draw has probability zero but would divide by zero
    norms[norms == 0] = 1.0
    r = rng.random((n, 1)) ** (1.0 / d)
    return g / norms * r


def random_w_star(d: int, norm: float, rng: np.random.Generator) -> np.ndarray:
    """Uniformly random direction scaled to the requested norm."""
    g = rng.standard_normal(d)
    return g / np.linalg.norm(g) * norm


def random_sign_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    return np.where(rng.random(d) < 0.5, -1.0, 1.0)


@dataclass(frozen=True)
class MarginDistribution:
    """Uniform-on-ball points conditioned on ``|<w_star, x>| >= margin``, labelled by ``w_star``."""

    w_star: np.ndarray
    margin: float = 1.0

    def __post_init__(self):
        w = np.asarray(self.w_star, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise RejectedInput("w_star must be a non-empty vector")
        if np.linalg.norm(w) < self.margin * (1 - 1e-12):
            raise RejectedInput(
                f"|w_star| = {np.linalg.norm(w):.4g} is below the margin {self.margin}: "
                "no point of the unit ball can be accepted"
            )
        object.__setattr__(self, "w_star", w)

    @property
    def dim(self) -> int:
        return self.w_star.size

    def sample_arrays(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Draw ``n`` clean examples as ``(X, y)`` arrays."""
        d = self.dim
        norm = np.linalg.norm(self.w_star)
        if norm <= self.margin * (1 + 1e-12):
            # the band is the pair of boundary points +-w*/|w*|, a null set for
            # ball proposals; sample that limit law directly
            u = self.w_star / norm
            s = np.where(rng.random(n) < 0.5, -1.0, 1.0)
            return s[:, None] * u[None, :], s.astype(np.int8)
        X = np.empty((n, d))
        filled = 0
        dry = 0
        while filled < n:
            want = n - filled
            chunk = min(max(2 * want, 256), MAX_PROPOSALS)
            P = uniform_ball(chunk, d, rng)
            ok = np.abs(P @ self.w_star) >= self.margin
            got = P[ok][:want]
            if got.shape[0] == 0:
                dry += chunk
                if dry >= MAX_PROPOSALS:
                    raise SamplingError(
                        f"no point accepted in {dry} proposals: the band "
                        f"|<w_star, x>| >= {self.margin} has negligible mass in the unit ball "
                        f"(|w_star| = {np.linalg.norm(self.w_star):.4g}, d = {d})"
                    )
                continue
            dry = 0
            X[filled:filled + got.shape[0]] = got
            filled += got.shape[0]
        return X, signs(X @ self.w_star)


@dataclass(frozen=True)
class BasisDistribution:
    """``x = e_i`` with ``i`` uniform, clean label ``w_star[i]`` for ``w_star`` in {-1,+1}^d."""

    w_star: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w_star, dtype=np.float64)
        if w.ndim != 1 or w.size == 0 or not np.all(np.abs(w) == 1):
            raise RejectedInput("w_star must be a non-empty vector with entries in {-1, +1}")
        object.__setattr__(self, "w_star", w)

    @property
    def dim(self) -> int:
        return self.w_star.size

    def sample_indices(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(0, self.dim, size=n)

    def sample_arrays(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        idx = self.sample_indices(n, rng)
        X = np.zeros((n, self.dim))
        X[np.arange(n), idx] = 1.0
        return X, self.w_star[idx].astype(np.int8)

    def error(self, w: np.ndarray) -> float:
        """Exact clean error of ``sign(<w, x>)``: a basis vector is wrong iff its coordinate sign is."""
        return float(np.mean(signs(w) != self.w_star))


def sample_margin(dist: MarginDistribution, rng: np.random.Generator) -> LabeledExample:
    X, y = dist.sample_arrays(1, rng)
    return LabeledExample(X[0], int(y[0]))


def sample_basis(dist: BasisDistribution, rng: np.random.Generator) -> LabeledExample:
    X, y = dist.sample_arrays(1, rng)
    return LabeledExample(X[0], int(y[0]))


def flip_labels(y: np.ndarray, mu: float, rng: np.random.Generator) -> np.ndarray:
    """Negate each label independently with probability ``mu``; returns a new array."""
    y = np.asarray(y)
    if mu == 0:
        return y.copy()
    flips = rng.random(y.shape) < mu
    return np.where(flips, -y, y).astype(y.dtype)


def flip_noise(ex: LabeledExample, spec: NoiseSpec, rng: np.random.Generator) -> LabeledExample:
    y = ex.y
    if spec.mu > 0 and rng.random() < spec.mu:
        y = -y
    return LabeledExample(ex.x, y)


class DistributionStream:
    """Endless noisy stream from a distribution object with ``sample_arrays``."""

    def __init__(self, dist, mu: float, rng: np.random.Generator, chunk: int = 4096):
        NoiseSpec(mu)  # range check
        self.dist = dist
        self.mu = float(mu)
        self.rng = rng
        self.chunk = int(chunk)
        self._X = np.empty((0, dist.dim))
        self._y = np.empty(0, dtype=np.int8)
        self._pos = 0

    @property
    def dim(self) -> int:
        return self.dist.dim

    def _refill(self, need: int):
        n = max(self.chunk, need)
        X, y = self.dist.sample_arrays(n, self.rng)
        y = flip_labels(y, self.mu, self.rng)
        self._X = np.concatenate([self._X[self._pos:], X])
        self._y = np.concatenate([self._y[self._pos:], y])
        self._pos = 0

    def next_batch(self, b: int) -> tuple[np.ndarray, np.ndarray]:
        if self._pos + b > len(self._y):
            self._refill(b)
        s = slice(self._pos, self._pos + b)
        self._pos += b
        return self._X[s], self._y[s]


class DatasetStream:
    """Uniform sampling with replacement from a fixed ``(X, y)`` dataset."""

    def __init__(self, X: np.ndarray, y: np.ndarray, rng: np.random.Generator, chunk: int = 8192):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        if X.ndim != 2 or X.shape[0] == 0 or y.shape != (X.shape[0],):
            raise RejectedInput("dataset must be a non-empty (n, d) matrix with n labels")
        self.X, self.y = X, y
        self.rng = rng
        self.chunk = int(chunk)
        self._idx = np.empty(0, dtype=np.int64)
        self._pos = 0

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def next_batch(self, b: int) -> tuple[np.ndarray, np.ndarray]:
        if self._pos + b > len(self._idx):
            fresh = self.rng.integers(0, len(self.y), size=max(self.chunk, b))
            self._idx = np.concatenate([self._idx[self._pos:], fresh])
            self._pos = 0
        idx = self._idx[self._pos:self._pos + b]
        self._pos += b
        return self.X[idx], self.y[idx]


def write_dataset_csv(path, X: np.ndarray, y: np.ndarray) -> None:
    """One row per example: ``x_0..x_{d-1}`` then ``label``; floats written with ``repr`` precision."""
    X = np.asarray(X, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{i}" for i in range(X.shape[1])] + ["label"])
        for row, label in zip(X, y):
            w.writerow([repr(float(v)) for v in row] + [int(label)])


def read_dataset_csv(path) -> tuple[np.ndarray, np.ndarray]:
    with open(Path(path), newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][-1] != "label":
        raise RejectedInput(f"{path}: missing header with trailing 'label' column")
    body = rows[1:]
    X = np.array([[float(v) for v in r[:-1]] for r in body]).reshape(len(body), len(rows[0]) - 1)
    y = np.array([int(r[-1]) for r in body], dtype=np.int8)
    return X, y
