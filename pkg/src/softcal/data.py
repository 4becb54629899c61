"""Evaluation-set container and per-prediction quantities derived from logits.

Everything downstream (metrics, losses, recalibration) consumes the
PredictionSummary produced here, so the conventions are pinned in one place:
float64 throughout, stable softmax, entropy in nats with 0*log(0) = 0,
argmax ties broken toward the lowest class index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy


class IngestionError(ValueError):
    """Logits or labels failed validation on ingestion."""


@dataclass(frozen=True)
class EvalSet:
    """An N x K float64 logit matrix plus N integer labels in [0, K)."""

    logits: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        logits = np.asarray(self.logits, dtype=np.float64)
        labels = np.asarray(self.labels)
        if logits.ndim != 2 or logits.shape[0] < 1 or logits.shape[1] < 2:
            raise IngestionError(
                f"logits must be N x K with N >= 1 and K >= 2, got shape {logits.shape}"
            )
        if not np.all(np.isfinite(logits)):
            raise IngestionError("logits contain non-finite values")
        if labels.ndim != 1 or labels.shape[0] != logits.shape[0]:
            raise IngestionError(
                f"labels must have shape ({logits.shape[0]},), got {labels.shape}"
            )
        if not np.issubdtype(labels.dtype, np.integer):
            if not np.all(labels == np.floor(labels)):
                raise IngestionError("labels must be integers")
        labels = labels.astype(np.int64)
        if labels.min() < 0 or labels.max() >= logits.shape[1]:
            raise IngestionError(
                f"labels must lie in [0, {logits.shape[1]}), got range "
                f"[{labels.min()}, {labels.max()}]"
            )
        object.__setattr__(self, "logits", logits)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.logits.shape[0]

    @property
    def num_classes(self) -> int:
        return self.logits.shape[1]


@dataclass(frozen=True)
class PredictionSummary:
    """Per-example quantities computed from (possibly temperature-scaled) logits.

    probs:        N x K softmax probabilities
    confidence:   max probability per row
    predicted:    argmax class (ties -> lowest index)
    accuracy:     1.0 where predicted == label else 0.0
    entropy:      Shannon entropy in nats
    norm_entropy: entropy / ln(K), in [0, 1]
    temperature:  the temperature the logits were divided by; gradients taken
                  with respect to the raw logits must chain through 1/temperature
    """

    probs: np.ndarray
    confidence: np.ndarray
    predicted: np.ndarray
    accuracy: np.ndarray
    entropy: np.ndarray
    norm_entropy: np.ndarray
    temperature: float

    @property
    def n(self) -> int:
        return self.probs.shape[0]

    @property
    def num_classes(self) -> int:
        return self.probs.shape[1]


def softmax_rows(z: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction. Shift-invariant by construction."""
    z = np.asarray(z, dtype=np.float64)
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def argmax_stable(row: np.ndarray) -> int:
    """Index of the maximum entry; ties resolve to the lowest index."""
    row = np.asarray(row)
    if row.ndim != 1 or row.size == 0:
        raise ValueError("argmax_stable expects a non-empty 1-d array")
    # np.argmax already returns the first maximal index.
    return int(np.argmax(row))


def entropy_nats(probs: np.ndarray) -> np.ndarray:
    """Shannon entropy per row in nats; 0 * log(0) treated as 0."""
    return -xlogy(probs, probs).sum(axis=1)


def summarize(eval_set: EvalSet, temperature: float = 1.0) -> PredictionSummary:
    """Compute the prediction summary of an EvalSet at a given temperature.

    Temperature t divides the logits before the softmax, so summarize(s, t)
    is bit-identical to summarize on pre-divided logits at t = 1.
    """
    if not np.isfinite(temperature) or temperature <= 0:
        raise ValueError(f"temperature must be finite and > 0, got {temperature}")
    z = eval_set.logits / temperature
    probs = softmax_rows(z)
    predicted = np.argmax(probs, axis=1)
    confidence = probs[np.arange(eval_set.n), predicted]
    accuracy = (predicted == eval_set.labels).astype(np.float64)
    h = entropy_nats(probs)
    return PredictionSummary(
        probs=probs,
        confidence=confidence,
        predicted=predicted,
        accuracy=accuracy,
        entropy=h,
        norm_entropy=h / np.log(eval_set.num_classes),
        temperature=float(temperature),
    )
