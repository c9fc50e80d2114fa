"""Accuracy and MTL-vs-STL loss comparison (delta_m)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import EmptyInput, EmptyTasks, LengthMismatch, NonFinite, OutOfRange, ZeroBaseline


@dataclass(frozen=True)
class TaskStats:
    weight: float
    train_loss: float
    train_accuracy: float


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    per_task: tuple[TaskStats, ...]

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(s.weight for s in self.per_task)

    @property
    def accuracies(self) -> tuple[float, ...]:
        return tuple(s.train_accuracy for s in self.per_task)


@dataclass(frozen=True)
class DeltaMRow:
    task: str
    stl_loss: float
    mtl_loss: float
    delta_m: float


@dataclass(frozen=True)
class DeltaMReport:
    per_task: tuple[DeltaMRow, ...]
    total: float

    @classmethod
    def from_losses(cls, names: Sequence[str], stl_losses: Sequence[float],
                    mtl_losses: Sequence[float]) -> "DeltaMReport":
        if not (len(names) == len(stl_losses) == len(mtl_losses)):
            raise LengthMismatch("names, stl_losses and mtl_losses differ in length")
        rows = tuple(
            DeltaMRow(n, float(s), float(m), delta_m_per_task(m, s))
            for n, s, m in zip(names, stl_losses, mtl_losses)
        )
        return cls(rows, delta_m_total([r.delta_m for r in rows]))


def binary_accuracy(probs, labels, threshold: float = 0.5) -> float:
    """Fraction of samples whose thresholded prediction equals the label.

    A probability exactly at ``threshold`` counts as a positive prediction.
    """
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels)
    if probs.size == 0:
        raise EmptyInput("no samples")
    if probs.shape != labels.shape:
        raise LengthMismatch(f"probs {probs.shape} vs labels {labels.shape}")
    if not 0.0 < threshold < 1.0:
        raise OutOfRange(f"threshold {threshold} outside (0, 1)")
    pred = probs >= threshold
    return float(np.count_nonzero(pred == (labels == 1))) / probs.size


def exact_mean(values: Sequence[float]) -> float:
    # Exact rational sum, rounded once: the mean of equal values is that value,
    # and the result never leaves [min, max]. The controller's tie rule relies on both.
    total = sum(Fraction(v) for v in values)
    return float(total / len(values))


def average_accuracy(acc: Sequence[float]) -> float:
    if len(acc) == 0:
        raise EmptyTasks("no task accuracies")
    for a in acc:
        if not 0.0 <= a <= 1.0:
            raise OutOfRange(f"accuracy {a} outside [0, 1]")
    return exact_mean(acc)


def delta_m_per_task(mtl_loss: float, stl_loss: float) -> float:
    """Relative loss change of the multi-task model against its single-task baseline.

    Negative means the multi-task model reached a lower loss.
    """
    if not (math.isfinite(mtl_loss) and math.isfinite(stl_loss)):
        raise NonFinite(f"non-finite loss (mtl={mtl_loss}, stl={stl_loss})")
    if stl_loss <= 0.0:
        raise ZeroBaseline(f"single-task loss must be positive, got {stl_loss}")
    if mtl_loss < 0.0:
        raise OutOfRange(f"multi-task loss must be nonnegative, got {mtl_loss}")
    return (mtl_loss - stl_loss) / stl_loss


def delta_m_total(per_task: Sequence[float]) -> float:
    if len(per_task) == 0:
        raise EmptyTasks("no delta_m values")
    if not all(math.isfinite(d) for d in per_task):
        raise NonFinite("non-finite delta_m value")
    return math.fsum(per_task) / len(per_task)


def format_2dp(x: float) -> str:
    """Two-decimal rendering that never prints ``-0.00``."""
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s
