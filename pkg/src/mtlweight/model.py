"""Hard-parameter-sharing network in plain numpy.

A stack of fully connected ReLU layers feeds one logistic head per task.
Gradients of the weighted sum of per-task binary cross-entropies are derived
by hand; ``numeric_gradient`` is the central-difference oracle used to check
them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import expit

from .controller import weighted_total_loss
from .errors import BadDimension, BadLabel, ParseError, ShapeMismatch

_TRUNK_KEY = 0
_HEAD_KEY = 1


@dataclass(frozen=True)
class ModelParams:
    """``trunk`` holds ``(W, b)`` per layer with ``W`` shaped (in, out).

    Column ``t`` of ``head_w`` and entry ``t`` of ``head_b`` form task t's head.
    """

    trunk: tuple[tuple[np.ndarray, np.ndarray], ...]
    head_w: np.ndarray
    head_b: np.ndarray

    @property
    def input_dim(self) -> int:
        return self.trunk[0][0].shape[0] if self.trunk else self.head_w.shape[0]

    @property
    def hidden_dims(self) -> tuple[int, ...]:
        return tuple(W.shape[1] for W, _ in self.trunk)

    @property
    def n_tasks(self) -> int:
        return self.head_w.shape[1]

    def arrays(self) -> list[np.ndarray]:
        """All parameter arrays in declaration order."""
        out = []
        for W, b in self.trunk:
            out += [W, b]
        return out + [self.head_w, self.head_b]

    @classmethod
    def from_arrays(cls, arrays: Sequence[np.ndarray]) -> "ModelParams":
        *trunk_flat, head_w, head_b = arrays
        trunk = tuple((trunk_flat[i], trunk_flat[i + 1]) for i in range(0, len(trunk_flat), 2))
        return cls(trunk, head_w, head_b)


@dataclass(frozen=True)
class ForwardCache:
    inputs: np.ndarray
    pre_activations: tuple[np.ndarray, ...]
    activations: tuple[np.ndarray, ...]  # activations[-1] is what the heads see
    logits: np.ndarray
    probs: np.ndarray


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *key]))


def init_params(input_dim: int, hidden_dims: Sequence[int], n_tasks: int, seed: int,
                task_ids: Sequence[int] | None = None) -> ModelParams:
    """Gaussian weights scaled by 1/sqrt(fan_in), zero biases.

    Each head is drawn from its own stream keyed by its task id, so a
    single-task model for task t starts with the same head as task t's head
    in the multi-task model (and the trunk is identical for a given seed).
    """
    hidden_dims = list(hidden_dims)
    if input_dim < 1 or n_tasks < 1 or any(h < 1 for h in hidden_dims):
        raise BadDimension(f"dimensions must be >= 1 (input={input_dim}, "
                           f"hidden={hidden_dims}, tasks={n_tasks})")
    if task_ids is None:
        task_ids = range(n_tasks)
    if len(task_ids) != n_tasks:
        raise BadDimension("task_ids length differs from n_tasks")

    rng = _rng(seed, _TRUNK_KEY)
    trunk = []
    fan_in = input_dim
    for h in hidden_dims:
        W = rng.standard_normal((fan_in, h)) / math.sqrt(fan_in)
        trunk.append((W, np.zeros(h)))
        fan_in = h
    cols = [_rng(seed, _HEAD_KEY, t).standard_normal(fan_in) / math.sqrt(fan_in) for t in task_ids]
    return ModelParams(tuple(trunk), np.stack(cols, axis=1), np.zeros(n_tasks))


def forward(params: ModelParams, batch) -> tuple[np.ndarray, ForwardCache]:
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0 or x.shape[1] != params.input_dim:
        raise ShapeMismatch(f"batch shape {x.shape}, expected (n>0, {params.input_dim})")
    pre, act = [], []
    a = x
    for W, b in params.trunk:
        z = a @ W + b
        a = np.maximum(z, 0.0)
        pre.append(z)
        act.append(a)
    logits = a @ params.head_w + params.head_b
    probs = expit(logits)
    return logits, ForwardCache(x, tuple(pre), tuple(act), logits, probs)


def _check_labels(labels, shape) -> np.ndarray:
    y = np.asarray(labels)
    if y.shape != shape:
        raise ShapeMismatch(f"labels shape {y.shape}, expected {shape}")
    if not np.all((y == 0) | (y == 1)):
        raise BadLabel("labels must be 0 or 1")
    return y.astype(np.float64)


def per_sample_bce(logits: np.ndarray, y: np.ndarray) -> np.ndarray:
    # max(z,0) - z*y + log(1 + exp(-|z|)): never exponentiates a large positive number
    return np.maximum(logits, 0.0) - logits * y + np.log1p(np.exp(-np.abs(logits)))


def task_losses(logits, labels) -> np.ndarray:
    """Mean binary cross-entropy per task (column)."""
    z = np.asarray(logits, dtype=np.float64)
    if z.ndim != 2 or z.shape[0] == 0:
        raise ShapeMismatch(f"logits must be a non-empty matrix, got shape {z.shape}")
    y = _check_labels(labels, z.shape)
    return per_sample_bce(z, y).mean(axis=0)


def backward(params: ModelParams, cache: ForwardCache, labels, weights: Sequence[float]) -> ModelParams:
    """Exact gradient of ``sum_t w_t * task_loss_t`` for every parameter."""
    y = _check_labels(labels, cache.logits.shape)
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (params.n_tasks,):
        raise ShapeMismatch(f"{w.size} weights for {params.n_tasks} tasks")
    n = cache.logits.shape[0]

    dlogits = (cache.probs - y) * (w / n)
    feats = cache.activations[-1] if params.trunk else cache.inputs
    g_head_w = feats.T @ dlogits
    g_head_b = dlogits.sum(axis=0)

    # Per-task contributions to the shared features, summed in task order.
    da = np.zeros_like(feats)
    for t in range(params.n_tasks):
        da += np.outer(dlogits[:, t], params.head_w[:, t])

    g_trunk = []
    for i in range(len(params.trunk) - 1, -1, -1):
        W, _ = params.trunk[i]
        dz = da * (cache.pre_activations[i] > 0.0)
        a_in = cache.activations[i - 1] if i > 0 else cache.inputs
        g_trunk.append((a_in.T @ dz, dz.sum(axis=0)))
        da = dz @ W.T
    return ModelParams(tuple(reversed(g_trunk)), g_head_w, g_head_b)


def objective(params: ModelParams, batch, labels, weights: Sequence[float]) -> float:
    logits, _ = forward(params, batch)
    return weighted_total_loss(weights, task_losses(logits, labels))


def numeric_gradient(params: ModelParams, batch, labels, weights: Sequence[float],
                     eps: float = 1e-5) -> ModelParams:
    """Central differences of the weighted total loss, one parameter at a time."""
    if not eps > 0.0:
        raise ValueError("eps must be positive")
    arrays = [a.copy() for a in params.arrays()]
    grads = [np.zeros_like(a) for a in arrays]
    for arr, g in zip(arrays, grads):
        flat, gflat = arr.reshape(-1), g.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + eps
            f_plus = objective(ModelParams.from_arrays(arrays), batch, labels, weights)
            flat[j] = orig - eps
            f_minus = objective(ModelParams.from_arrays(arrays), batch, labels, weights)
            flat[j] = orig
            gflat[j] = (f_plus - f_minus) / (2.0 * eps)
    return ModelParams.from_arrays(grads)


def sgd_step(params: ModelParams, grads: ModelParams, lr: float) -> ModelParams:
    if lr < 0.0:
        raise ValueError(f"learning rate must be >= 0, got {lr}")
    p, g = params.arrays(), grads.arrays()
    if len(p) != len(g) or any(a.shape != b.shape for a, b in zip(p, g)):
        raise ShapeMismatch("gradient structure does not match parameters")
    if lr == 0.0:
        return ModelParams.from_arrays([a.copy() for a in p])
    return ModelParams.from_arrays([a - lr * b for a, b in zip(p, g)])


def max_relative_error(a: ModelParams, b: ModelParams, floor: float = 1e-8) -> float:
    worst = 0.0
    for x, y in zip(a.arrays(), b.arrays()):
        if x.size:
            denom = np.maximum(np.maximum(np.abs(x), np.abs(y)), floor)
            worst = max(worst, float(np.max(np.abs(x - y) / denom)))
    return worst


# Checkpoint format (text, UTF-8):
#   line 1: "mtlweight-params 1"
#   line 2: "input_dim=<d> hidden=<h1,h2,...> n_tasks=<T> seed=<s>"  (hidden empty if none)
#   then one value per line, 17 significant digits, arrays in declaration order
#   (W1, b1, W2, b2, ..., head_w, head_b), each array flattened row-major.
_MAGIC = "mtlweight-params 1"


def save_params(params: ModelParams, path, seed: int) -> None:
    hidden = ",".join(str(h) for h in params.hidden_dims)
    lines = [_MAGIC, f"input_dim={params.input_dim} hidden={hidden} "
                     f"n_tasks={params.n_tasks} seed={seed}"]
    for arr in params.arrays():
        lines.extend(format(float(v), ".17g") for v in arr.reshape(-1))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_params(path) -> tuple[ModelParams, int]:
    """Return ``(params, seed)`` from a checkpoint written by ``save_params``."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if len(lines) < 2 or lines[0] != _MAGIC:
        raise ParseError("not a parameter checkpoint", line=1)
    try:
        fields = dict(kv.split("=", 1) for kv in lines[1].split(" "))
        d = int(fields["input_dim"])
        hidden = [int(h) for h in fields["hidden"].split(",") if h]
        n_tasks = int(fields["n_tasks"])
        seed = int(fields["seed"])
    except (KeyError, ValueError) as exc:
        raise ParseError(f"bad header: {exc}", line=2) from None
    template = init_params(d, hidden, n_tasks, 0)
    values = lines[2:]
    expected = sum(a.size for a in template.arrays())
    if len(values) != expected:
        raise ParseError(f"expected {expected} values, found {len(values)}")
    arrays, pos = [], 0
    for a in template.arrays():
        chunk = []
        for k in range(a.size):
            try:
                chunk.append(float(values[pos + k]))
            except ValueError:
                raise ParseError(f"bad value {values[pos + k]!r}", line=3 + pos + k) from None
        arrays.append(np.array(chunk, dtype=np.float64).reshape(a.shape))
        pos += a.size
    return ModelParams.from_arrays(arrays), seed
