"""Shared domain types and the randomness contract.

Every random draw in this package goes through :func:`seeded_rng`, which
returns a numpy ``Generator`` backed by PCG64. PCG64 output for a given seed
is stable across platforms and numpy releases, which is what makes training
traces reproducible bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

__all__ = [
    "RejectedInput",
    "LabeledExample",
    "LinearModel",
    "NoiseSpec",
    "TraceRecord",
    "TrainingTrace",
    "sign",
    "signs",
    "predict",
    "seeded_rng",
    "child_rngs",
    "stack_examples",
]


class RejectedInput(ValueError):
    """Raised when an argument violates an operation's precondition."""


def _as_vector(x, name="x") -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise RejectedInput(f"{name} must be a 1-d vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise RejectedInput(f"{name} has non-finite coordinates")
    return arr


@dataclass(frozen=True)
class LabeledExample:
    x: np.ndarray
    y: int

    def __post_init__(self):
        x = _as_vector(self.x)
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        if self.y not in (-1, 1):
            raise RejectedInput(f"label must be -1 or +1, got {self.y!r}")
        object.__setattr__(self, "y", int(self.y))


@dataclass
class LinearModel:
    w: np.ndarray

    def __post_init__(self):
        self.w = _as_vector(self.w, "w").copy()
        if self.w.size == 0:
            raise RejectedInput("weight vector must be non-empty")

    @property
    def dim(self) -> int:
        return self.w.size

    @classmethod
    def zeros(cls, dim: int) -> "LinearModel":
        return cls(np.zeros(dim))


@dataclass(frozen=True)
class NoiseSpec:
    """Label-flip channel: each label is negated independently with probability ``mu``."""

    mu: float
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.mu < 0.5):
            raise RejectedInput(f"flip probability must lie in [0, 0.5), got {self.mu}")
        if not (0 <= self.seed < 2**64):
            raise RejectedInput("seed must be a 64-bit unsigned integer")


def sign(v: float) -> int:
    """Sign with the tie-break ``sign(0) = +1``."""
    return 1 if v >= 0 else -1


def signs(v: np.ndarray) -> np.ndarray:
    """Vectorised :func:`sign` returning an int8 array of +/-1."""
    return np.where(np.asarray(v) >= 0, 1, -1).astype(np.int8)


def predict(m: LinearModel, x) -> int:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (m.dim,):
        raise RejectedInput(f"expected a vector of length {m.dim}, got shape {x.shape}")
    return sign(float(m.w @ x))


def seeded_rng(seed: int) -> np.random.Generator:
    """Deterministic PCG64 stream for ``seed`` (any 64-bit unsigned integer)."""
    if not (0 <= int(seed) < 2**64):
        raise RejectedInput("seed must be a 64-bit unsigned integer")
    return np.random.Generator(np.random.PCG64(int(seed)))


def child_rngs(seed: int, n: int) -> list[np.random.Generator]:
    """``n`` independent PCG64 streams derived from ``seed`` through numpy's SeedSequence."""
    if not (0 <= int(seed) < 2**64):
        raise RejectedInput("seed must be a 64-bit unsigned integer")
    return [np.random.Generator(np.random.PCG64(s))
            for s in np.random.SeedSequence(int(seed)).spawn(n)]


def stack_examples(examples: Sequence[LabeledExample]) -> tuple[np.ndarray, np.ndarray]:
    """Turn a sequence of examples into an ``(n, d)`` feature matrix and label vector."""
    if len(examples) == 0:
        raise RejectedInput("cannot stack an empty sequence of examples")
    dims = {ex.x.size for ex in examples}
    if len(dims) != 1:
        raise RejectedInput(f"examples have mixed dimensions {sorted(dims)}")
    X = np.stack([ex.x for ex in examples])
    y = np.array([ex.y for ex in examples], dtype=np.int8)
    return X, y


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    disagreed: bool
    updated: bool
    update_count_so_far: int
    test_accuracy: Optional[float]


@dataclass
class TrainingTrace:
    """Per-iteration log of a training run, stored column-wise.

    ``test_accuracy`` holds NaN on iterations where no evaluation happened.
    """

    eval_period: int
    disagreed: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))
    updated: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))
    test_accuracy: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if self.eval_period < 1:
            raise RejectedInput("eval_period must be >= 1")
        self.disagreed = np.asarray(self.disagreed, dtype=bool)
        self.updated = np.asarray(self.updated, dtype=bool)
        self.test_accuracy = np.asarray(self.test_accuracy, dtype=np.float64)
        n = len(self.disagreed)
        if len(self.updated) != n or len(self.test_accuracy) != n:
            raise RejectedInput("trace columns must have equal length")

    def __len__(self) -> int:
        return len(self.disagreed)

    @property
    def iterations(self) -> np.ndarray:
        return np.arange(1, len(self) + 1)

    @property
    def update_counts(self) -> np.ndarray:
        return np.cumsum(self.updated, dtype=np.int64)

    @property
    def total_updates(self) -> int:
        return int(self.updated.sum())

    def eval_points(self) -> tuple[np.ndarray, np.ndarray]:
        """Iterations at which accuracy was measured, and the measured values."""
        idx = np.flatnonzero(~np.isnan(self.test_accuracy))
        return idx + 1, self.test_accuracy[idx]

    def records(self) -> Iterator[TraceRecord]:
        counts = self.update_counts
        for i in range(len(self)):
            acc = self.test_accuracy[i]
            yield TraceRecord(
                i + 1,
                bool(self.disagreed[i]),
                bool(self.updated[i]),
                int(counts[i]),
                None if np.isnan(acc) else float(acc),
            )

    def same_as(self, other: "TrainingTrace") -> bool:
        return (
            self.eval_period == other.eval_period
            and np.array_equal(self.disagreed, other.disagreed)
            and np.array_equal(self.updated, other.updated)
            and np.array_equal(self.test_accuracy, other.test_accuracy, equal_nan=True)
        )
