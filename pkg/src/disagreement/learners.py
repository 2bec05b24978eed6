"""Base learners: the "how to update" half of the meta-algorithm.

Each learner applies its update rule unconditionally to whatever batch it is
handed. Deciding *which* examples to hand it is the trainer's job.

All learners share a small duck-typed surface used by the trainer:

* ``dim``                      input dimension
* ``scores(X)``                real-valued outputs, shape ``(n,)``
* ``predict(X)``               +/-1 predictions (``sign(0) = +1``)
* ``update(X, y, weight=1.0)`` apply the rule to a batch in place
* ``mistake_driven``           True when the classical algorithm only
                               updates on ``y * score <= 0`` (perceptron)

Checkpoint layout (all integers little-endian uint32, all reals
little-endian float64)::

    magic      4 bytes  b"UBDL"
    kind       uint32   0 = perceptron, 1 = sgd, 2 = mlp
    n_arrays   uint32
    per array: ndim uint32, then ndim uint32 extents
    payload:   every array flattened in C order, concatenated

Hyperparameters ride along as leading 1-element arrays.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Union

import numpy as np

from .core import LinearModel, RejectedInput, signs

__all__ = [
    "PerceptronLearner",
    "SgdLearner",
    "MlpLearner",
    "sigmoid",
    "save_checkpoint",
    "load_checkpoint",
    "dump_checkpoint",
    "parse_checkpoint",
    "perceptron_update",
    "sgd_update",
    "mlp_forward",
    "mlp_update",
]


def sigmoid(z):
    # split by sign so exp never overflows
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _check_batch(X, y, dim, allow_empty=False):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != dim:
        raise RejectedInput(f"batch features must have shape (n, {dim}), got {X.shape}")
    if y.shape != (X.shape[0],):
        raise RejectedInput("labels must be a vector with one entry per row of X")
    if X.shape[0] == 0 and not allow_empty:
        raise RejectedInput("empty batch")
    return X, y


def _check_weight(weight):
    if not (0.0 < weight <= 1.0):
        raise RejectedInput(f"batch weight must lie in (0, 1], got {weight}")


class _LinearBase:
    model: LinearModel

    @property
    def dim(self) -> int:
        return self.model.dim

    @property
    def w(self) -> np.ndarray:
        return self.model.w

    def scores(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[-1] != self.dim:
            raise RejectedInput(f"expected {self.dim} features, got {X.shape[-1]}")
        return X @ self.model.w

    def predict(self, X) -> np.ndarray:
        return signs(self.scores(X))

    def accuracy(self, X, y) -> float:
        return float(np.mean(self.predict(X) == y))


class PerceptronLearner(_LinearBase):
    """Perceptron rule ``w <- w + sum(y_i x_i)`` over the batch.

    ``weight`` scales the summed step; it is 1 everywhere the classical
    algorithm is concerned.
    """

    mistake_driven = True

    def __init__(self, model: Union[LinearModel, np.ndarray]):
        self.model = model if isinstance(model, LinearModel) else LinearModel(model)

    def update(self, X, y, weight: float = 1.0) -> "PerceptronLearner":
        X, y = _check_batch(X, y, self.dim, allow_empty=True)
        _check_weight(weight)
        if X.shape[0]:
            self._step(X, y, weight)
        return self

    def _step(self, X, y, weight=1.0):
        # unchecked path used by the trainer's inner loop
        if X.shape[0] == 1:
            if weight == 1.0:
                if y[0] > 0:
                    self.model.w += X[0]
                else:
                    self.model.w -= X[0]
            else:
                self.model.w += (weight * float(y[0])) * X[0]
            return
        step = y.astype(np.float64) @ X
        if weight != 1.0:
            step *= weight
        self.model.w += step

    def copy(self) -> "PerceptronLearner":
        return PerceptronLearner(LinearModel(self.model.w))


class SgdLearner(_LinearBase):
    """Linear model trained by SGD on the logistic or hinge loss."""

    mistake_driven = False

    def __init__(self, model, learning_rate: float = 0.1, loss: str = "logistic"):
        if learning_rate <= 0:
            raise RejectedInput("learning_rate must be positive")
        if loss not in ("logistic", "hinge"):
            raise RejectedInput(f"unknown loss {loss!r}")
        self.model = model if isinstance(model, LinearModel) else LinearModel(model)
        self.learning_rate = float(learning_rate)
        self.loss = loss

    def loss_value(self, X, y) -> float:
        X, y = _check_batch(X, y, self.dim)
        margins = y * (X @ self.model.w)
        if self.loss == "logistic":
            return float(np.mean(np.logaddexp(0.0, -margins)))
        return float(np.mean(np.maximum(0.0, 1.0 - margins)))

    def gradient(self, X, y) -> np.ndarray:
        X, y = _check_batch(X, y, self.dim)
        yf = y.astype(np.float64)
        margins = yf * (X @ self.model.w)
        if self.loss == "logistic":
            coef = -yf * sigmoid(-margins)
        else:
            coef = np.where(margins < 1.0, -yf, 0.0)
        return coef @ X / X.shape[0]

    def update(self, X, y, weight: float = 1.0) -> "SgdLearner":
        _check_weight(weight)
        self.model.w -= self.learning_rate * weight * self.gradient(X, y)
        return self

    _step = update

    def copy(self) -> "SgdLearner":
        return SgdLearner(LinearModel(self.model.w), self.learning_rate, self.loss)


class MlpLearner:
    """One-hidden-layer ReLU network with a scalar logit, trained by momentum SGD.

    Loss is the logistic loss ``log(1 + exp(-y * logit))`` averaged over the
    batch. The velocity recurrence is ``v <- momentum * v - lr * weight * grad``
    followed by ``theta <- theta + v``.
    """

    mistake_driven = False
    PARAMS = ("W1", "b1", "W2", "b2")

    def __init__(self, W1, b1, W2, b2, learning_rate=0.01, momentum=0.9):
        W1 = np.array(W1, dtype=np.float64, ndmin=2)
        h = W1.shape[0]
        self.W1 = W1
        self.b1 = np.array(b1, dtype=np.float64).reshape(h)
        self.W2 = np.array(W2, dtype=np.float64).reshape(h)
        self.b2 = np.array(b2, dtype=np.float64).reshape(())
        if learning_rate <= 0:
            raise RejectedInput("learning_rate must be positive")
        if not (0.0 <= momentum < 1.0):
            raise RejectedInput("momentum must lie in [0, 1)")
        self.learning_rate = float(learning_rate)
        self.momentum = float(momentum)
        self.velocity = {k: np.zeros_like(getattr(self, k)) for k in self.PARAMS}

    @classmethod
    def initialize(cls, d=784, hidden=64, rng=None, learning_rate=0.01, momentum=0.9):
        """He-scaled Gaussian weights, zero biases."""
        if rng is None:
            raise RejectedInput("an explicit rng is required for initialisation")
        W1 = rng.standard_normal((hidden, d)) * np.sqrt(2.0 / d)
        W2 = rng.standard_normal(hidden) * np.sqrt(1.0 / hidden)
        return cls(W1, np.zeros(hidden), W2, 0.0, learning_rate, momentum)

    @property
    def dim(self) -> int:
        return self.W1.shape[1]

    @property
    def hidden(self) -> int:
        return self.W1.shape[0]

    def _as_input(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise RejectedInput(f"expected inputs with {self.dim} features, got {X.shape}")
        return X

    def scores(self, X) -> np.ndarray:
        X = self._as_input(X)
        return np.maximum(X @ self.W1.T + self.b1, 0.0) @ self.W2 + self.b2

    def predict(self, X) -> np.ndarray:
        return signs(self.scores(X))

    def forward(self, x) -> tuple[float, int]:
        """Logit and +/-1 prediction for a single input vector."""
        logit = float(self.scores(x)[0])
        return logit, 1 if logit >= 0 else -1

    def accuracy(self, X, y) -> float:
        return float(np.mean(self.predict(X) == y))

    def loss_value(self, X, y) -> float:
        X, y = _check_batch(X, y, self.dim)
        return float(np.mean(np.logaddexp(0.0, -y * self.scores(X))))

    def gradients(self, X, y) -> dict:
        X, y = _check_batch(X, y, self.dim)
        n = X.shape[0]
        pre = X @ self.W1.T + self.b1
        act = np.maximum(pre, 0.0)
        logit = act @ self.W2 + self.b2
        yf = y.astype(np.float64)
        dlogit = -yf * sigmoid(-yf * logit) / n
        dact = np.outer(dlogit, self.W2) * (pre > 0)
        return {
            "W1": dact.T @ X,
            "b1": dact.sum(axis=0),
            "W2": act.T @ dlogit,
            "b2": np.asarray(dlogit.sum()),
        }

    def update(self, X, y, weight: float = 1.0) -> "MlpLearner":
        _check_weight(weight)
        grads = self.gradients(X, y)
        step = self.learning_rate * weight
        for k in self.PARAMS:
            v = self.velocity[k]
            v *= self.momentum
            v -= step * grads[k]
            setattr(self, k, getattr(self, k) + v)
        return self

    _step = update

    def parameters(self) -> dict:
        return {k: getattr(self, k) for k in self.PARAMS}

    def copy(self) -> "MlpLearner":
        twin = MlpLearner(self.W1.copy(), self.b1.copy(), self.W2.copy(), self.b2.copy(),
                          self.learning_rate, self.momentum)
        twin.velocity = {k: v.copy() for k, v in self.velocity.items()}
        return twin


# -- example-sequence front ends ------------------------------------------

def _example_arrays(batch, dim):
    batch = list(batch)
    if not batch:
        return np.zeros((0, dim)), np.zeros(0, dtype=np.int8)
    X = np.array([ex.x for ex in batch], dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != dim:
        raise RejectedInput(f"examples must have {dim} features")
    return X, np.array([ex.y for ex in batch], dtype=np.int8)


def perceptron_update(learner: PerceptronLearner, batch) -> PerceptronLearner:
    """Add ``y * x`` for every example in ``batch``; an empty batch is a no-op."""
    return learner.update(*_example_arrays(batch, learner.dim))


def sgd_update(learner: SgdLearner, batch, weight: float = 1.0) -> SgdLearner:
    return learner.update(*_example_arrays(batch, learner.dim), weight=weight)


def mlp_forward(learner: MlpLearner, x) -> tuple[float, int]:
    return learner.forward(x)


def mlp_update(learner: MlpLearner, batch, weight: float = 1.0) -> MlpLearner:
    return learner.update(*_example_arrays(batch, learner.dim), weight=weight)


# -- checkpoints ------------------------------------------------------------

_MAGIC = b"UBDL"
_KINDS = {PerceptronLearner: 0, SgdLearner: 1, MlpLearner: 2}
_LOSSES = ("logistic", "hinge")


def _arrays_of(learner):
    if isinstance(learner, PerceptronLearner):
        return [learner.w]
    if isinstance(learner, SgdLearner):
        return [np.array([learner.learning_rate]),
                np.array([float(_LOSSES.index(learner.loss))]), learner.w]
    if isinstance(learner, MlpLearner):
        arrays = [np.array([learner.learning_rate]), np.array([learner.momentum])]
        arrays += [learner.parameters()[k] for k in MlpLearner.PARAMS]
        arrays += [learner.velocity[k] for k in MlpLearner.PARAMS]
        return arrays
    raise TypeError(f"cannot checkpoint {type(learner).__name__}")


def dump_checkpoint(learner) -> bytes:
    arrays = [np.asarray(a, dtype="<f8") for a in _arrays_of(learner)]
    head = [_MAGIC, struct.pack("<II", _KINDS[type(learner)], len(arrays))]
    for a in arrays:
        head.append(struct.pack(f"<I{a.ndim}I", a.ndim, *a.shape))
    return b"".join(head) + b"".join(a.tobytes(order="C") for a in arrays)


def parse_checkpoint(blob: bytes):
    if blob[:4] != _MAGIC:
        raise RejectedInput("not a learner checkpoint (bad magic)")
    kind, n = struct.unpack_from("<II", blob, 4)
    off = 12
    shapes = []
    for _ in range(n):
        (ndim,) = struct.unpack_from("<I", blob, off)
        shapes.append(struct.unpack_from(f"<{ndim}I", blob, off + 4))
        off += 4 + 4 * ndim
    arrays = []
    for shape in shapes:
        size = int(np.prod(shape, dtype=np.int64))
        if off + 8 * size > len(blob):
            raise RejectedInput("truncated checkpoint payload")
        arrays.append(np.frombuffer(blob, dtype="<f8", count=size, offset=off)
                      .reshape(shape).astype(np.float64))
        off += 8 * size
    if off != len(blob):
        raise RejectedInput("trailing bytes after checkpoint payload")

    if kind == 0:
        return PerceptronLearner(LinearModel(arrays[0]))
    if kind == 1:
        return SgdLearner(LinearModel(arrays[2]), float(arrays[0][0]),
                          _LOSSES[int(arrays[1][0])])
    if kind == 2:
        lr, mom = float(arrays[0][0]), float(arrays[1][0])
        net = MlpLearner(*arrays[2:6], learning_rate=lr, momentum=mom)
        net.velocity = dict(zip(MlpLearner.PARAMS, arrays[6:10]))
        return net
    raise RejectedInput(f"unknown learner kind {kind}")


def save_checkpoint(learner, path) -> None:
    Path(path).write_bytes(dump_checkpoint(learner))


def load_checkpoint(path):
    return parse_checkpoint(Path(path).read_bytes())
