"""Multi-task binary datasets: synthetic generation, CSV I/O, splitting, batching.

CSV layout (UTF-8, LF, no quoting)::

    x_0,x_1,...,x_{d-1},y_<task>,...
    0.12,-1.3,...,1,...

Feature columns carry an ``x_`` prefix, label columns a ``y_`` prefix; labels
are the literal strings ``0`` or ``1``.  Floats are written with 9 significant
digits.
"""

from __future__ import annotations

import csv
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from statistics import NormalDist
from typing import Sequence

import numpy as np

from .errors import (BadBatchSize, BadDimension, BadFraction, BadLabel, BadProfile,
                     OutOfRange, ParseError, ShapeMismatch, TooFewSamples)

_GEN_KEY = 101
_SPLIT_KEY = 102
_BATCH_KEY = 103


@dataclass(frozen=True)
class MultiTaskDataset:
    features: np.ndarray  # (n, d) float64
    labels: np.ndarray  # (n, T) int8 in {0, 1}
    task_names: tuple[str, ...]

    def __post_init__(self):
        if self.features.ndim != 2 or self.labels.ndim != 2:
            raise ShapeMismatch("features and labels must be matrices")
        if self.features.shape[0] != self.labels.shape[0]:
            raise ShapeMismatch(f"{self.features.shape[0]} feature rows vs "
                                f"{self.labels.shape[0]} label rows")
        if len(self.task_names) != self.labels.shape[1]:
            raise ShapeMismatch("task_names length differs from label columns")
        if not np.all(np.isfinite(self.features)):
            raise OutOfRange("non-finite feature value")
        if not np.all((self.labels == 0) | (self.labels == 1)):
            raise BadLabel("labels must be 0 or 1")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_tasks(self) -> int:
        return self.labels.shape[1]

    def subset(self, idx) -> "MultiTaskDataset":
        return MultiTaskDataset(self.features[idx], self.labels[idx], self.task_names)

    def task(self, t: int) -> "MultiTaskDataset":
        """Single-task view keeping only label column ``t``."""
        return MultiTaskDataset(self.features, self.labels[:, [t]], (self.task_names[t],))


@dataclass(frozen=True)
class TaskProfile:
    """How a synthetic task is generated.

    ``margin`` sets how sharply the labels follow the hyperplane: the latent
    Gaussian noise blurring the boundary has standard deviation 1/margin**2,
    against a unit-variance signal.  Larger is easier; 2.0 allows roughly 92%
    accuracy on a balanced task, 0.2 is close to a coin flip.
    """

    margin: float = 1.0
    positive_rate: float = 0.5
    label_noise: float = 0.0
    name: str | None = None

    def __post_init__(self):
        if not (math.isfinite(self.margin) and self.margin > 0.0):
            raise BadProfile(f"margin must be positive, got {self.margin}")
        if not 0.0 < self.positive_rate < 1.0:
            raise BadProfile(f"positive_rate must lie in (0, 1), got {self.positive_rate}")
        if not 0.0 <= self.label_noise < 0.5:
            raise BadProfile(f"label_noise must lie in [0, 0.5), got {self.label_noise}")


def generate_synthetic(n: int, d: int, profiles: Sequence[TaskProfile], seed: int,
                       shared_rank: int | None = None) -> MultiTaskDataset:
    """Standard-normal features; each task thresholds a noisy random projection.

    For task t with unit direction u, the latent score is ``u.x + e/margin**2``
    with ``e ~ N(0, 1)``; the threshold is the (1 - positive_rate) quantile of
    that score's distribution, so the expected positive rate is exact.
    Labels are then flipped independently with probability ``label_noise``.

    With ``shared_rank=k`` every task direction is drawn from one common random
    k-dimensional subspace, so the tasks are related and a shared trunk can
    pool evidence across them. ``None`` draws directions from all of R^d.
    """
    if n < 1 or d < 1:
        raise BadDimension(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    if len(profiles) == 0:
        raise BadProfile("at least one task profile is required")
    if shared_rank is not None and not 1 <= shared_rank <= d:
        raise BadDimension(f"shared_rank must lie in [1, {d}], got {shared_rank}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, _GEN_KEY]))
    x = rng.standard_normal((n, d))
    basis = None
    if shared_rank is not None:
        basis, _ = np.linalg.qr(rng.standard_normal((d, shared_rank)))
    labels = np.empty((n, len(profiles)), dtype=np.int8)
    for t, p in enumerate(profiles):
        u = rng.standard_normal(d) if basis is None else basis @ rng.standard_normal(shared_rank)
        u /= np.linalg.norm(u)
        noise_sd = 1.0 / p.margin ** 2
        latent_sd = math.sqrt(1.0 + noise_sd ** 2)
        threshold = latent_sd * NormalDist().inv_cdf(1.0 - p.positive_rate)
        score = x @ u + rng.standard_normal(n) * noise_sd
        y = score > threshold
        flips = rng.random(n) < p.label_noise
        labels[:, t] = y ^ flips
    names = tuple(p.name if p.name else f"task{t}" for t, p in enumerate(profiles))
    return MultiTaskDataset(x, labels, names)


def normalize_pixels(x):
    """Map intensities in [0, 1] to [-1, 1]."""
    arr = np.asarray(x, dtype=np.float64)
    if not np.all((arr >= 0.0) & (arr <= 1.0)):
        raise OutOfRange("pixel values must lie in [0, 1]")
    return (arr - 0.5) / 0.5


def _fmt(v: float) -> str:
    return format(float(v), ".9g")


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file in the target directory, then rename into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dataset_to_csv(ds: MultiTaskDataset) -> str:
    header = [f"x_{j}" for j in range(ds.n_features)] + [f"y_{name}" for name in ds.task_names]
    lines = [",".join(header)]
    for row, lab in zip(ds.features, ds.labels):
        lines.append(",".join([_fmt(v) for v in row] + [str(int(v)) for v in lab]))
    return "\n".join(lines) + "\n"


def write_csv(ds: MultiTaskDataset, path) -> None:
    atomic_write_text(path, dataset_to_csv(ds))


def load_csv(path) -> MultiTaskDataset:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such dataset file: {path}")
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise ParseError("empty file", line=1)
        x_cols = [i for i, h in enumerate(header) if h.startswith("x_")]
        y_cols = [i for i, h in enumerate(header) if h.startswith("y_")]
        other = [h for h in header if not (h.startswith("x_") or h.startswith("y_"))]
        if other:
            raise ParseError(f"unexpected column(s) {other}", line=1)
        if not x_cols or not y_cols:
            raise ParseError("need at least one x_ and one y_ column", line=1)
        names = [header[i][2:] for i in y_cols]
        if any(not nm for nm in names) or len(set(names)) != len(names):
            raise ParseError("label column names must be non-empty and unique", line=1)

        feats, labs = [], []
        for row in reader:
            line = reader.line_num
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, found {len(row)}", line=line)
            try:
                fx = [float(row[i]) for i in x_cols]
            except ValueError as exc:
                raise ParseError(str(exc), line=line) from None
            if not all(math.isfinite(v) for v in fx):
                raise ParseError("non-finite feature value", line=line)
            ly = []
            for i in y_cols:
                if row[i] not in ("0", "1"):
                    raise BadLabel(f"label {row[i]!r} in column {header[i]} is not 0/1", line=line)
                ly.append(int(row[i]))
            feats.append(fx)
            labs.append(ly)
    if not feats:
        raise ParseError("no data rows", line=2)
    return MultiTaskDataset(np.array(feats, dtype=np.float64),
                            np.array(labs, dtype=np.int8), tuple(names))


def split(ds: MultiTaskDataset, train_fraction: float, seed: int) -> tuple[MultiTaskDataset, MultiTaskDataset]:
    if not 0.0 < train_fraction < 1.0:
        raise BadFraction(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n = ds.n_samples
    if n < 2:
        raise TooFewSamples(f"need at least 2 samples to split, got {n}")
    n_train = min(max(int(round(n * train_fraction)), 1), n - 1)
    perm = np.random.default_rng(np.random.SeedSequence([seed, _SPLIT_KEY])).permutation(n)
    return ds.subset(np.sort(perm[:n_train])), ds.subset(np.sort(perm[n_train:]))


def batches(n: int, batch_size: int, seed: int, epoch: int) -> list[np.ndarray]:
    if batch_size < 1:
        raise BadBatchSize(f"batch_size must be >= 1, got {batch_size}")
    perm = np.random.default_rng(np.random.SeedSequence([seed, _BATCH_KEY, epoch])).permutation(n)
    return [perm[i:i + batch_size] for i in range(0, n, batch_size)]
