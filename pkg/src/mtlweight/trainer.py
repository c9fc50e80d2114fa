"""Single-task baselines, the weighted multi-task loop, and the comparison run."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import controller as ctl
from .controller import StrategyKind, WeightConfig
from .data import MultiTaskDataset, batches, split
from .errors import Divergence, InvalidConfig, LengthMismatch
from .metrics import DeltaMReport, EpochStats, TaskStats
from .model import ModelParams, backward, forward, init_params, per_sample_bce, sgd_step

log = logging.getLogger(__name__)

ALL_STRATEGIES = (StrategyKind.DEEPCHEST, StrategyKind.UNIFORM, StrategyKind.STATIC_INIT)


@dataclass(frozen=True)
class Hyperparams:
    epochs: int = 30
    batch_size: int = 64
    learning_rate: float = 0.1
    hidden_dims: tuple[int, ...] = (32,)
    seed: int = 0
    weight_cfg: WeightConfig = WeightConfig()
    strategy: StrategyKind = StrategyKind.DEEPCHEST
    train_fraction: float = 0.8
    threshold: float = 0.5

    def __post_init__(self):
        if self.epochs < 1:
            raise InvalidConfig(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise InvalidConfig(f"batch_size must be >= 1, got {self.batch_size}")
        # lr == 0 is allowed: it freezes the parameters, which the tests rely on.
        if not (math.isfinite(self.learning_rate) and self.learning_rate >= 0.0):
            raise InvalidConfig(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.seed < 0:
            raise InvalidConfig(f"seed must be >= 0, got {self.seed}")
        object.__setattr__(self, "hidden_dims", tuple(self.hidden_dims))
        object.__setattr__(self, "strategy", StrategyKind(self.strategy))


@dataclass
class RunLog:
    strategy: StrategyKind
    task_names: tuple[str, ...]
    epoch_stats: list[EpochStats]
    final_val_losses: tuple[float, ...]
    final_val_accuracies: tuple[float, ...]
    stl_accuracies: Optional[tuple[float, ...]]
    # Weights computed after the last epoch; they would drive epoch `epochs` if there were one.
    next_weights: tuple[float, ...]
    final_params: ModelParams = field(repr=False)
    controller_seconds: float = 0.0
    train_seconds: float = 0.0


@dataclass
class ComparisonReport:
    task_names: tuple[str, ...]
    stl_accuracies: tuple[float, ...]
    stl_losses: tuple[float, ...]
    stl_runs: list[RunLog]
    mtl_runs: dict[StrategyKind, RunLog]
    delta_m: DeltaMReport

    @property
    def controller_seconds(self) -> float:
        return sum(r.controller_seconds for r in self.mtl_runs.values())

    @property
    def train_seconds(self) -> float:
        return (sum(r.train_seconds for r in self.mtl_runs.values())
                + sum(r.train_seconds for r in self.stl_runs))


def evaluate(params: ModelParams, ds: MultiTaskDataset, threshold: float = 0.5
             ) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Per-task (mean BCE, accuracy) over the whole dataset."""
    logits, cache = forward(params, ds.features)
    y = ds.labels.astype(np.float64)
    losses = per_sample_bce(logits, y).mean(axis=0)
    acc = ((cache.probs >= threshold) == (ds.labels == 1)).mean(axis=0)
    return tuple(float(v) for v in losses), tuple(float(v) for v in acc)


def _fit(train: MultiTaskDataset, val: MultiTaskDataset, hp: Hyperparams,
         strategy: StrategyKind, stl_acc: Sequence[float], task_ids: Sequence[int]) -> RunLog:
    T = train.n_tasks
    cfg = hp.weight_cfg
    params = init_params(train.n_features, hp.hidden_dims, T, hp.seed, task_ids=task_ids)

    t_ctl = time.perf_counter()
    w0 = ctl.initial_weights_for(strategy, stl_acc, cfg)
    ctl_seconds = time.perf_counter() - t_ctl
    weights = w0

    stats: list[EpochStats] = []
    n = train.n_samples
    start = time.perf_counter()
    for epoch in range(hp.epochs):
        correct = np.zeros(T, dtype=np.int64)
        loss_sum = np.zeros(T)
        w_arr = np.asarray(weights)
        for idx in batches(n, hp.batch_size, hp.seed, epoch):
            xb, yb = train.features[idx], train.labels[idx]
            logits, cache = forward(params, xb)
            # accuracy is taken before this batch's update
            correct += np.count_nonzero((cache.probs >= hp.threshold) == (yb == 1), axis=0)
            loss_sum += per_sample_bce(logits, yb.astype(np.float64)).sum(axis=0)
            grads = backward(params, cache, yb, w_arr)
            params = sgd_step(params, grads, hp.learning_rate)
        train_loss = loss_sum / n
        if not np.all(np.isfinite(train_loss)):
            raise Divergence(f"non-finite training loss at epoch {epoch}")
        train_acc = tuple(float(c) / n for c in correct)
        stats.append(EpochStats(epoch, tuple(
            TaskStats(weights[t], float(train_loss[t]), train_acc[t]) for t in range(T))))

        t_ctl = time.perf_counter()
        weights = ctl.weights_for_epoch(strategy, w0, weights, train_acc, cfg)
        ctl_seconds += time.perf_counter() - t_ctl
    train_seconds = time.perf_counter() - start

    val_loss, val_acc = evaluate(params, val, hp.threshold)
    if not all(math.isfinite(v) for v in val_loss):
        raise Divergence("non-finite validation loss")
    return RunLog(strategy, train.task_names, stats, val_loss, val_acc, None, weights, params,
                  ctl_seconds, train_seconds)


def train_stl(ds: MultiTaskDataset, task_index: int, hp: Hyperparams
              ) -> tuple[float, float, RunLog]:
    """Train a one-head model on task ``task_index`` with weight fixed at 1.

    Returns ``(validation accuracy, validation loss, run log)``.
    """
    if not 0 <= task_index < ds.n_tasks:
        raise IndexError(f"task_index {task_index} out of range for {ds.n_tasks} tasks")
    train, val = split(ds, hp.train_fraction, hp.seed)
    run = _fit(train.task(task_index), val.task(task_index), hp, StrategyKind.UNIFORM,
               [1.0], task_ids=[task_index])
    log.debug("stl task %s: val acc %.4f loss %.4f", ds.task_names[task_index],
              run.final_val_accuracies[0], run.final_val_losses[0])
    return run.final_val_accuracies[0], run.final_val_losses[0], run


def train_mtl(ds: MultiTaskDataset, hp: Hyperparams, stl_acc: Sequence[float]) -> RunLog:
    if len(stl_acc) != ds.n_tasks:
        raise LengthMismatch(f"{len(stl_acc)} STL accuracies for {ds.n_tasks} tasks")
    train, val = split(ds, hp.train_fraction, hp.seed)
    run = _fit(train, val, hp, hp.strategy, stl_acc, task_ids=range(ds.n_tasks))
    run.stl_accuracies = tuple(float(a) for a in stl_acc)
    log.debug("mtl %s: val loss %s", hp.strategy.value, run.final_val_losses)
    return run


def run_comparison(ds: MultiTaskDataset, hp: Hyperparams,
                   strategies: Sequence[StrategyKind] = ALL_STRATEGIES) -> ComparisonReport:
    strategies = [StrategyKind(s) for s in strategies]
    if StrategyKind.DEEPCHEST not in strategies:
        raise InvalidConfig("the strategy list must include deepchest")
    stl = [train_stl(ds, t, hp) for t in range(ds.n_tasks)]
    stl_acc = tuple(r[0] for r in stl)
    stl_loss = tuple(r[1] for r in stl)
    mtl = {}
    for s in strategies:
        mtl[s] = train_mtl(ds, replace(hp, strategy=s), stl_acc)
    report = DeltaMReport.from_losses(ds.task_names, stl_loss,
                                      mtl[StrategyKind.DEEPCHEST].final_val_losses)
    return ComparisonReport(ds.task_names, stl_acc, stl_loss, [r[2] for r in stl], mtl, report)

