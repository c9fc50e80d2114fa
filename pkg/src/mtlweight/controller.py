"""Gradient-free task weighting.

Weights start from single-task accuracies (harder tasks get more weight) and
are adjusted once per epoch: tasks whose training accuracy falls below the
cross-task mean are boosted by ``alpha`` (up to ``w_max``), all others are
decayed by ``beta``.  Everything here is a pure function over plain floats.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import EmptyTasks, LengthMismatch, NonFinite, OutOfRange
from .metrics import exact_mean

WeightVector = tuple[float, ...]


class StrategyKind(str, enum.Enum):
    DEEPCHEST = "deepchest"
    UNIFORM = "uniform"
    STATIC_INIT = "static_init"


@dataclass(frozen=True)
class WeightConfig:
    alpha: float = 1.1
    beta: float = 1.05
    w_max: float = 5.0
    init_scale: float = 0.5
    w_floor: Optional[float] = None

    def __post_init__(self):
        if not self.alpha > 1.0:
            raise OutOfRange(f"alpha must be > 1, got {self.alpha}")
        if not self.beta > 1.0:
            raise OutOfRange(f"beta must be > 1, got {self.beta}")
        if not self.init_scale > 0.0:
            raise OutOfRange(f"init_scale must be > 0, got {self.init_scale}")
        if not self.w_max >= 1.0 + self.init_scale:
            raise OutOfRange(
                f"w_max={self.w_max} is below the largest initial weight {1.0 + self.init_scale}")
        if self.w_floor is not None and not 0.0 < self.w_floor < 1.0:
            raise OutOfRange(f"w_floor must lie in (0, 1), got {self.w_floor}")
        for name in ("alpha", "beta", "w_max", "init_scale"):
            if not math.isfinite(getattr(self, name)):
                raise NonFinite(f"{name} is not finite")


def _check_accuracies(acc: Sequence[float]) -> None:
    if len(acc) == 0:
        raise EmptyTasks("no tasks")
    for a in acc:
        if not 0.0 <= a <= 1.0:
            raise OutOfRange(f"accuracy {a} outside [0, 1]")


def check_weights(w: Sequence[float], cfg: WeightConfig) -> None:
    """Raise unless ``w`` is an admissible weight vector under ``cfg``."""
    if len(w) == 0:
        raise EmptyTasks("empty weight vector")
    lo = cfg.w_floor if cfg.w_floor is not None else 0.0
    for x in w:
        if not (x > 0.0 and lo <= x <= cfg.w_max):
            raise OutOfRange(f"weight {x} outside ({lo}, {cfg.w_max}]")


def init_weights(stl_acc: Sequence[float], cfg: WeightConfig = WeightConfig()) -> WeightVector:
    _check_accuracies(stl_acc)
    return tuple(1.0 + (1.0 - float(a)) * cfg.init_scale for a in stl_acc)


def update_weights(w: Sequence[float], train_acc: Sequence[float],
                   cfg: WeightConfig = WeightConfig()) -> WeightVector:
    if len(w) != len(train_acc):
        raise LengthMismatch(f"{len(w)} weights vs {len(train_acc)} accuracies")
    _check_accuracies(train_acc)
    check_weights(w, cfg)
    a_avg = exact_mean(train_acc)
    out = []
    for wt, at in zip(w, train_acc):
        # Exact comparison; a task tied with the mean is decayed.
        nxt = min(wt * cfg.alpha, cfg.w_max) if at < a_avg else wt / cfg.beta
        if cfg.w_floor is not None:
            nxt = max(nxt, cfg.w_floor)
        out.append(nxt)
    return tuple(out)


def weighted_total_loss(w: Sequence[float], losses: Sequence[float]) -> float:
    if len(w) == 0 or len(losses) == 0:
        raise EmptyTasks("no tasks")
    if len(w) != len(losses):
        raise LengthMismatch(f"{len(w)} weights vs {len(losses)} losses")
    total = 0.0
    for wt, lt in zip(w, losses):
        lt = float(lt)
        if not math.isfinite(lt):
            raise NonFinite(f"loss {lt} is not finite")
        if lt < 0.0:
            raise OutOfRange(f"loss {lt} is negative")
        total += float(wt) * lt
    return total


def uniform_weights(n_tasks: int) -> WeightVector:
    return (1.0,) * n_tasks


def initial_weights_for(strategy: StrategyKind, stl_acc: Sequence[float],
                        cfg: WeightConfig = WeightConfig()) -> WeightVector:
    """Epoch-0 weights: all ones for ``uniform``, STL-derived otherwise."""
    strategy = StrategyKind(strategy)
    if strategy is StrategyKind.UNIFORM:
        _check_accuracies(stl_acc)
        return uniform_weights(len(stl_acc))
    return init_weights(stl_acc, cfg)


def weights_for_epoch(strategy: StrategyKind, init: Sequence[float], prev: Sequence[float],
                      train_acc: Sequence[float], cfg: WeightConfig = WeightConfig()) -> WeightVector:
    strategy = StrategyKind(strategy)
    if strategy is StrategyKind.DEEPCHEST:
        return update_weights(prev, train_acc, cfg)
    if len(prev) != len(train_acc) or len(init) != len(train_acc):
        raise LengthMismatch("weights and accuracies differ in length")
    _check_accuracies(train_acc)
    if strategy is StrategyKind.UNIFORM:
        return uniform_weights(len(train_acc))
    return tuple(float(x) for x in init)
