"""JSON run configuration.

Sections: ``data``, ``train``, ``weighting``, ``sim``, ``output``, plus a
top-level ``seed`` shared by every stage.  Every section is optional and falls
back to the defaults below; unknown keys anywhere are rejected.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .controller import StrategyKind, WeightConfig
from .data import TaskProfile
from .errors import InvalidConfig, MtlWeightError
from .simdyn import SimTask
from .trainer import Hyperparams


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class TaskSection(_Strict):
    name: Optional[str] = None
    margin: float = 1.0
    positive_rate: float = 0.5
    label_noise: float = 0.0


def _default_tasks() -> list[TaskSection]:
    return [
        TaskSection(name="t0", margin=2.0, positive_rate=0.5),
        TaskSection(name="t1", margin=1.0, positive_rate=0.3, label_noise=0.05),
        TaskSection(name="t2", margin=0.5, positive_rate=0.2),
        TaskSection(name="t3", margin=2.0, positive_rate=0.1),
        TaskSection(name="t4", margin=1.5, positive_rate=0.4, label_noise=0.1),
        TaskSection(name="t5", margin=0.8, positive_rate=0.15),
        TaskSection(name="t6", margin=1.5, positive_rate=0.05),
        TaskSection(name="t7", margin=1.2, positive_rate=0.5, label_noise=0.02),
    ]


class DataSection(_Strict):
    n: int = 4000
    d: int = 32
    shared_rank: Optional[int] = 4
    train_fraction: float = 0.8
    tasks: List[TaskSection] = Field(default_factory=_default_tasks)


class TrainSection(_Strict):
    epochs: int = 60
    batch_size: int = 32
    learning_rate: float = 0.2
    hidden_dims: List[int] = Field(default_factory=lambda: [64])
    threshold: float = 0.5
    strategies: List[StrategyKind] = Field(
        default_factory=lambda: [StrategyKind.DEEPCHEST, StrategyKind.UNIFORM,
                                 StrategyKind.STATIC_INIT])


class WeightingSection(_Strict):
    alpha: float = 1.1
    beta: float = 1.05
    w_max: float = 5.0
    init_scale: float = 0.5
    w_floor: Optional[float] = None


class SimTaskSection(_Strict):
    name: Optional[str] = None
    ceiling: float = 1.0
    rate: float = 0.1
    noise_sd: float = 0.0


def _default_sim_tasks() -> list[SimTaskSection]:
    tasks = [SimTaskSection(name=f"s{i}", rate=0.1, noise_sd=0.01) for i in range(8)]
    return tasks + [SimTaskSection(name="slow", rate=0.05, noise_sd=0.01)]


class SimSection(_Strict):
    epochs: int = 200
    strategies: List[StrategyKind] = Field(
        default_factory=lambda: [StrategyKind.DEEPCHEST, StrategyKind.UNIFORM])
    tasks: List[SimTaskSection] = Field(default_factory=_default_sim_tasks)


class OutputSection(_Strict):
    dir: str = "runs/default"


class RunConfig(_Strict):
    seed: int = Field(default=0, ge=0)
    data: DataSection = Field(default_factory=DataSection)
    train: TrainSection = Field(default_factory=TrainSection)
    weighting: WeightingSection = Field(default_factory=WeightingSection)
    sim: SimSection = Field(default_factory=SimSection)
    output: OutputSection = Field(default_factory=OutputSection)

    def weight_config(self) -> WeightConfig:
        return WeightConfig(**self.weighting.model_dump())

    def task_profiles(self) -> list[TaskProfile]:
        return [TaskProfile(t.margin, t.positive_rate, t.label_noise,
                            t.name if t.name else f"task{i}")
                for i, t in enumerate(self.data.tasks)]

    def hyperparams(self) -> Hyperparams:
        tr = self.train
        return Hyperparams(epochs=tr.epochs, batch_size=tr.batch_size,
                           learning_rate=tr.learning_rate, hidden_dims=tuple(tr.hidden_dims),
                           seed=self.seed, weight_cfg=self.weight_config(),
                           train_fraction=self.data.train_fraction, threshold=tr.threshold)

    def sim_tasks(self) -> list[SimTask]:
        return [SimTask(t.ceiling, t.rate, t.noise_sd, t.name if t.name else f"task{i}")
                for i, t in enumerate(self.sim.tasks)]

    def validate_domain(self) -> None:
        """Build every domain object once so bad values surface as config errors."""
        rank = self.data.shared_rank
        if rank is not None and not 1 <= rank <= self.data.d:
            raise InvalidConfig(f"data.shared_rank must lie in [1, data.d={self.data.d}], got {rank}")
        if self.data.n < 2 or self.data.d < 1 or not self.data.tasks:
            raise InvalidConfig("data needs n >= 2, d >= 1 and at least one task")
        if not self.sim.tasks or self.sim.epochs < 1:
            raise InvalidConfig("sim needs at least one task and epochs >= 1")
        try:
            self.hyperparams()
            self.task_profiles()
            self.sim_tasks()
        except MtlWeightError as exc:
            raise InvalidConfig(str(exc)) from None


def _format_errors(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def parse_config(obj, seed_override: int | None = None) -> RunConfig:
    try:
        cfg = RunConfig.model_validate(obj)
    except ValidationError as exc:
        raise InvalidConfig(_format_errors(exc)) from None
    if seed_override is not None:
        if seed_override < 0:
            raise InvalidConfig(f"seed must be >= 0, got {seed_override}")
        cfg = cfg.model_copy(update={"seed": seed_override})
    cfg.validate_domain()
    return cfg


def load_config(path, seed_override: int | None = None) -> RunConfig:
    """Read and validate a config file. Missing files raise ``FileNotFoundError``."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"{path}: invalid JSON: {exc}") from None
    return parse_config(obj, seed_override)
