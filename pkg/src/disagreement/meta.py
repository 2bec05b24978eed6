"""Update by disagreement: the "when to update" half of the meta-algorithm.

Two base learners see the same mini-batch. Only the examples on which their
predictions differ are passed on to the learners' update rule, and both
learners receive exactly that subset with exactly the same batch weight.
The gate reads features only, never labels.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import LabeledExample, RejectedInput, TrainingTrace, stack_examples

__all__ = [
    "GATED",
    "VANILLA",
    "RunConfig",
    "DisagreementTrainer",
    "disagreement_mask",
    "disagreement_set",
    "batch_weight",
    "select_final",
    "write_trace_csv",
    "read_trace_csv",
    "TRACE_COLUMNS",
]

GATED = "gated"
VANILLA = "vanilla"


def _as_arrays(data):
    """Accept ``(X, y)`` arrays or a sequence of :class:`LabeledExample`."""
    if isinstance(data, tuple) and len(data) == 2 and not isinstance(data[0], LabeledExample):
        X, y = data
        return np.asarray(X, dtype=np.float64), np.asarray(y)
    return stack_examples(list(data))


def _step(learner, X, y, weight=1.0):
    # built-in learners expose an unchecked fast path; others just need update()
    return getattr(learner, "_step", learner.update)(X, y, weight)


def _check_pair(h1, h2):
    if h1.dim != h2.dim:
        raise RejectedInput(f"learners disagree on input dimension ({h1.dim} vs {h2.dim})")


def disagreement_mask(h1, h2, X) -> np.ndarray:
    """Boolean mask of rows of ``X`` where the two learners predict different signs."""
    _check_pair(h1, h2)
    return h1.predict(X) != h2.predict(X)


def disagreement_set(h1, h2, batch: Sequence[LabeledExample]) -> list[LabeledExample]:
    """The examples of ``batch`` on which ``h1`` and ``h2`` disagree, in their original order."""
    if len(batch) == 0:
        raise RejectedInput("empty batch")
    X, _ = stack_examples(list(batch))
    mask = disagreement_mask(h1, h2, X)
    return [ex for ex, m in zip(batch, mask) if m]


def batch_weight(n_disagree: int, b: int, threshold: float) -> float:
    """Step weight ``min(1, |S| / (threshold * b))``; a zero threshold disables reweighting."""
    if threshold <= 0:
        return 1.0
    return min(1.0, n_disagree / (threshold * b))


@dataclass(frozen=True)
class RunConfig:
    total_iters: int
    eval_period: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.total_iters < 1:
            raise RejectedInput("total_iters must be >= 1")
        if self.eval_period < 1:
            raise RejectedInput("eval_period must be >= 1")


@dataclass
class DisagreementTrainer:
    """Two learners plus the gating schedule.

    ``mode="vanilla"`` (and every iteration ``t <= warmup_iters``) trains each
    learner with its own classical rule: mistake-driven learners such as the
    perceptron update on the examples with ``y * score <= 0``, the others on
    the whole batch. With ``split_warmup`` the learners take turns during
    warm-up so each sees a disjoint part of the stream.
    """

    h1: object
    h2: object
    batch_size: int = 1
    warmup_iters: int = 0
    reweight_threshold: float = 0.0
    mode: str = GATED
    split_warmup: bool = False

    def __post_init__(self):
        _check_pair(self.h1, self.h2)
        if self.batch_size < 1:
            raise RejectedInput("batch size must be >= 1")
        if self.warmup_iters < 0:
            raise RejectedInput("warmup_iters must be >= 0")
        if not (0.0 <= self.reweight_threshold <= 1.0):
            raise RejectedInput("reweight_threshold must lie in [0, 1]")
        if self.mode not in (GATED, VANILLA):
            raise RejectedInput(f"unknown mode {self.mode!r}")

    def _classic_step(self, learner, X, y, s) -> bool:
        if learner.mistake_driven:
            wrong = y * s <= 0
            if not wrong.any():
                return False
            if wrong.all():
                _step(learner, X, y)
            else:
                _step(learner, X[wrong], y[wrong])
            return True
        _step(learner, X, y)
        return True

    def _classic_step1(self, learner, X, y, s) -> bool:
        if learner.mistake_driven and y[0] * s > 0:
            return False
        _step(learner, X, y)
        return True

    def train(self, stream, cfg: RunConfig, test_set=None) -> TrainingTrace:
        """Run ``cfg.total_iters`` iterations, pulling one batch per iteration from ``stream``.

        ``stream`` must expose ``next_batch(b) -> (X, y)``. Accuracy of ``h1``
        on ``test_set`` is logged every ``cfg.eval_period`` iterations.
        """
        h1, h2, b = self.h1, self.h2, self.batch_size
        if getattr(stream, "dim", h1.dim) != h1.dim:
            raise RejectedInput(f"stream dimension {stream.dim} != learner dimension {h1.dim}")
        Xt = yt = None
        if test_set is not None:
            Xt, yt = _as_arrays(test_set)
            if Xt.shape[0] == 0:
                raise RejectedInput("empty test set")

        N = cfg.total_iters
        period = cfg.eval_period
        disagreed = np.zeros(N, dtype=bool)
        updated = np.zeros(N, dtype=bool)
        acc = np.full(N, np.nan)
        classic_until = N if self.mode == VANILLA else self.warmup_iters
        split = self.split_warmup and self.mode == GATED
        thr = self.reweight_threshold
        scores1, scores2 = h1.scores, h2.scores

        for t in range(1, N + 1):
            X, y = stream.next_batch(b)
            if len(y) != b:
                raise RejectedInput(f"stream returned {len(y)} examples at iteration {t}, wanted {b}")

            if b == 1:
                s1 = scores1(X)[0]
                s2 = scores2(X)[0]
                dis = (s1 >= 0) != (s2 >= 0)
                if t <= classic_until:
                    if split:
                        learner, s = (h1, s1) if t % 2 else (h2, s2)
                        changed = self._classic_step1(learner, X, y, s)
                    else:
                        c1 = self._classic_step1(h1, X, y, s1)
                        c2 = self._classic_step1(h2, X, y, s2)
                        changed = c1 or c2
                elif dis:
                    _step(h1, X, y)
                    _step(h2, X, y)
                    changed = True
                else:
                    changed = False
            else:
                s1 = scores1(X)
                s2 = scores2(X)
                mask = (s1 >= 0) != (s2 >= 0)
                k = int(np.count_nonzero(mask))
                dis = k > 0
                if t <= classic_until:
                    if split:
                        learner, s = (h1, s1) if t % 2 else (h2, s2)
                        changed = self._classic_step(learner, X, y, s)
                    else:
                        c1 = self._classic_step(h1, X, y, s1)
                        c2 = self._classic_step(h2, X, y, s2)
                        changed = c1 or c2
                elif k:
                    if k < b:
                        X, y = X[mask], y[mask]
                    w = batch_weight(k, b, thr)
                    _step(h1, X, y, w)
                    _step(h2, X, y, w)
                    changed = True
                else:
                    changed = False

            disagreed[t - 1] = dis
            updated[t - 1] = changed
            if Xt is not None and t % period == 0:
                acc[t - 1] = h1.accuracy(Xt, yt)

        return TrainingTrace(period, disagreed, updated, acc)


def select_final(h1, h2, clean_holdout) -> int:
    """Return 1 or 2, whichever learner is more accurate on the clean holdout (ties go to 1)."""
    X, y = _as_arrays(clean_holdout)
    if X.shape[0] == 0:
        raise RejectedInput("empty holdout")
    return 2 if h2.accuracy(X, y) > h1.accuracy(X, y) else 1


TRACE_COLUMNS = ("iteration", "disagreed", "updated", "cumulative_updates", "test_accuracy")


def write_trace_csv(trace: TrainingTrace, path) -> None:
    counts = trace.update_counts
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for i in range(len(trace)):
            a = trace.test_accuracy[i]
            w.writerow((i + 1, int(trace.disagreed[i]), int(trace.updated[i]), int(counts[i]),
                        "" if np.isnan(a) else repr(float(a))))


def read_trace_csv(path, eval_period: Optional[int] = None) -> TrainingTrace:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != TRACE_COLUMNS:
        raise RejectedInput(f"{path}: unexpected header {rows[0]}")
    body = rows[1:]
    disagreed = np.array([r[1] == "1" for r in body], dtype=bool)
    updated = np.array([r[2] == "1" for r in body], dtype=bool)
    acc = np.array([float(r[4]) if r[4] else np.nan for r in body])
    if eval_period is None:
        evals = np.flatnonzero(~np.isnan(acc))
        eval_period = int(evals[0] + 1) if len(evals) else max(len(body), 1)
    return TrainingTrace(eval_period, disagreed, updated, acc)
