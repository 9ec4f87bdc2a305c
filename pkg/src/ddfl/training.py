"""Multinomial logistic regression: mini-batch SGD training and evaluation.

Parameters stay float32; all loss and gradient sums accumulate in float64,
and each SGD step rounds back to float32. With a fixed seed the batch
order, and therefore every parameter bit, is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import NumericError, ValidationError
from .params import ParameterVector


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float
    epochs: int
    batch_size: int
    seed: int

    def __post_init__(self):
        if not (self.learning_rate > 0 and np.isfinite(self.learning_rate)):
            raise ValidationError(f"learning_rate must be positive, got {self.learning_rate}")
        # epochs == 0 is allowed: it makes training the identity, which the
        # round protocol relies on for fixed-point checks.
        if self.epochs < 0:
            raise ValidationError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise ValidationError(f"batch_size must be >= 1, got {self.batch_size}")
        if not (0 <= self.seed < 2**64):
            raise ValidationError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class EvalResult:
    accuracy: float
    mean_loss: float
    sample_count: int


def _check_shapes(params: ParameterVector, data: Dataset) -> tuple[int, int]:
    if len(params.shapes) != 1:
        raise ValidationError(
            f"expected a single dense layer, got {len(params.shapes)} layers"
        )
    d, k = params.shapes[0]
    if d != data.dim or k != data.num_classes:
        raise ValidationError(
            f"model is {d}x{k} but data has {data.dim} features / {data.num_classes} classes"
        )
    return d, k


def _softmax_rows(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _mean_cross_entropy(probs: np.ndarray, labels: np.ndarray) -> float:
    # log(0) -> inf is the divergence signal callers test for; keep it quiet.
    with np.errstate(divide="ignore"):
        return float(-np.log(probs[np.arange(len(labels)), labels]).mean())


def loss_and_gradient(params: ParameterVector, data: Dataset) -> tuple[float, np.ndarray]:
    """Mean softmax cross-entropy and its analytic gradient, both in float64.

    The returned gradient is flat and uses the same layout as
    ``params.values`` (row-major weights, then biases).
    """
    d, k = _check_shapes(params, data)
    w, b = params.layer(0)
    x = data.features.astype(np.float64)
    y = data.labels
    n = len(data)
    scores = x @ w.astype(np.float64) + b.astype(np.float64)
    probs = _softmax_rows(scores)
    loss = _mean_cross_entropy(probs, y)
    delta = probs
    delta[np.arange(n), y] -= 1.0
    delta /= n
    grad_w = x.T @ delta
    grad_b = delta.sum(axis=0)
    return loss, np.concatenate([grad_w.reshape(-1), grad_b])


def local_train(params: ParameterVector, data: Dataset, cfg: TrainConfig) -> ParameterVector:
    """Run seeded mini-batch SGD and return the updated parameters.

    The input vector is never modified. ``epochs == 0`` returns a bitwise
    copy of the input.
    """
    d, k = _check_shapes(params, data)
    n = len(data)
    if n == 0:
        raise ValidationError("cannot train on an empty dataset")
    if cfg.batch_size > n:
        raise ValidationError(f"batch_size {cfg.batch_size} exceeds dataset size {n}")
    if cfg.epochs == 0:
        return ParameterVector(params.values, params.shapes)

    rng = np.random.default_rng(cfg.seed)
    w0, b0 = params.layer(0)
    w = w0.astype(np.float32).copy()
    b = b0.astype(np.float32).copy()
    x64 = data.features.astype(np.float64)
    labels = data.labels
    lr = float(cfg.learning_rate)

    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for batch_index, start in enumerate(range(0, n, cfg.batch_size)):
            idx = order[start : start + cfg.batch_size]
            xb = x64[idx]
            yb = labels[idx]
            m = len(idx)
            scores = xb @ w.astype(np.float64) + b.astype(np.float64)
            probs = _softmax_rows(scores)
            loss = _mean_cross_entropy(probs, yb)
            if not np.isfinite(loss):
                raise NumericError(
                    f"non-finite loss at epoch {epoch}, batch {batch_index}"
                )
            probs[np.arange(m), yb] -= 1.0
            probs /= m
            grad_w = xb.T @ probs
            grad_b = probs.sum(axis=0)
            w = (w.astype(np.float64) - lr * grad_w).astype(np.float32)
            b = (b.astype(np.float64) - lr * grad_b).astype(np.float32)
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise NumericError(f"non-finite parameters after epoch {epoch}")

    return ParameterVector(np.concatenate([w.reshape(-1), b]), params.shapes)


def evaluate(params: ParameterVector, data: Dataset) -> EvalResult:
    """Accuracy (argmax, ties to the lowest class index) and mean cross-entropy."""
    _check_shapes(params, data)
    w, b = params.layer(0)
    x = data.features.astype(np.float64)
    y = data.labels
    n = len(data)
    scores = x @ w.astype(np.float64) + b.astype(np.float64)
    predictions = scores.argmax(axis=1)
    correct = int((predictions == y).sum())
    probs = _softmax_rows(scores)
    mean_loss = _mean_cross_entropy(probs, y)
    return EvalResult(accuracy=correct / n, mean_loss=mean_loss, sample_count=n)
