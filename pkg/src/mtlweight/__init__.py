"""Performance-driven dynamic task weighting for multi-task learning."""

__version__ = "0.1.0"

from .controller import (StrategyKind, WeightConfig, init_weights, update_weights,
                         weighted_total_loss, weights_for_epoch)
from .metrics import DeltaMReport, binary_accuracy, delta_m_per_task, delta_m_total

__all__ = [
    "StrategyKind", "WeightConfig", "init_weights", "update_weights", "weighted_total_loss",
    "weights_for_epoch", "DeltaMReport", "binary_accuracy", "delta_m_per_task", "delta_m_total",
]
