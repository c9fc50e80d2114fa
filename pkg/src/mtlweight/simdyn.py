"""Closed-form learning-dynamics simulator for exercising the controller.

Each task's accuracy closes a fraction of its gap to a ceiling every epoch,
proportional to its learning rate and its share of the total weight:

    a' = clip(a + rate * share * (ceiling - a) + noise, 0, ceiling)

This is a test harness for the weighting rule, not a model of real training
curves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .controller import StrategyKind, WeightConfig, uniform_weights, weights_for_epoch
from .errors import InvalidConfig, LengthMismatch, OutOfRange


@dataclass(frozen=True)
class SimTask:
    ceiling: float = 1.0
    rate: float = 0.1
    noise_sd: float = 0.0
    name: str | None = None

    def __post_init__(self):
        if not 0.0 < self.ceiling <= 1.0:
            raise OutOfRange(f"ceiling must lie in (0, 1], got {self.ceiling}")
        if not (math.isfinite(self.rate) and self.rate >= 0.0):
            raise OutOfRange(f"rate must be >= 0, got {self.rate}")
        if not (math.isfinite(self.noise_sd) and self.noise_sd >= 0.0):
            raise OutOfRange(f"noise_sd must be >= 0, got {self.noise_sd}")


@dataclass(frozen=True)
class SimState:
    epoch: int
    accuracies: tuple[float, ...]
    weights: tuple[float, ...]


def sim_step(state: SimState, tasks: Sequence[SimTask], cfg: WeightConfig,
             strategy: StrategyKind, noise: Sequence[float] | None = None) -> SimState:
    """Advance one epoch. ``noise`` holds this epoch's per-task draws (zeros if omitted)."""
    T = len(tasks)
    if len(state.accuracies) != T or len(state.weights) != T:
        raise LengthMismatch(f"state has {len(state.accuracies)} tasks, expected {T}")
    if noise is None:
        noise = [0.0] * T
    if len(noise) != T:
        raise LengthMismatch(f"{len(noise)} noise draws for {T} tasks")
    total = math.fsum(state.weights)
    acc = []
    for a, w, task, eps in zip(state.accuracies, state.weights, tasks, noise):
        share = w / total
        nxt = a + task.rate * share * (task.ceiling - a) + eps
        acc.append(min(max(nxt, 0.0), task.ceiling))
    acc = tuple(acc)
    weights = weights_for_epoch(strategy, uniform_weights(T), state.weights, acc, cfg)
    return SimState(state.epoch + 1, acc, weights)


def run_sim(tasks: Sequence[SimTask], strategy: StrategyKind, cfg: WeightConfig,
            epochs: int, seed: int) -> list[SimState]:
    """Trajectory of ``epochs + 1`` states, starting from zero accuracy and unit weights."""
    if epochs < 1:
        raise InvalidConfig(f"epochs must be >= 1, got {epochs}")
    strategy = StrategyKind(strategy)
    T = len(tasks)
    sd = np.array([t.noise_sd for t in tasks], dtype=np.float64)
    rng = np.random.default_rng(seed)
    state = SimState(0, (0.0,) * T, uniform_weights(T))
    traj = [state]
    for _ in range(epochs):
        # one draw per task per epoch, whatever the sd, so streams line up across configs
        draws = rng.standard_normal(T) * sd
        state = sim_step(state, tasks, cfg, strategy, [float(x) for x in draws])
        traj.append(state)
    return traj
