"""Soft calibration objectives: differentiable ECE and AvUC relaxations,
temperature scaling, and a small deterministic numpy trainer."""

from .avuc import (
    AvucCounts,
    AvucSpec,
    DegenerateBatchError,
    avuc,
    avuc_grad,
    s_avuc,
    s_avuc_grad,
    soft_uncertainty,
)
from .binning import (
    BinningSpec,
    HardAssignment,
    SoftBinningSpec,
    assign_hard,
    soft_membership,
    soft_membership_grad,
)
from .data import EvalSet, IngestionError, PredictionSummary, argmax_stable, summarize
from .gradcheck import finite_diff_check, finite_diff_grad, max_rel_error
from .losses import LossSpec, LossValueGrad, composite_loss, focal, mse, nll
from .metrics import (
    BINNED,
    LABEL_BINNED,
    BinStats,
    EceReport,
    bin_stats_hard,
    bin_stats_soft,
    ece,
    eval_convention_ece,
    reliability_table,
    sb_ece,
    sb_ece_confidence_grad,
    sb_ece_grad,
)
from .mlp import MlpModel
from .recalibrate import TemperatureFit, apply_temperature, fit_temperature
from .synthetic import TASK_KINDS, SyntheticTask, make_synthetic_task
from .trainer import (
    SweepRow,
    TrainConfig,
    TrainingDivergedError,
    TrainReport,
    forward_backward,
    sweep_one_at_a_time,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "BINNED",
    "LABEL_BINNED",
    "AvucCounts",
    "AvucSpec",
    "BinStats",
    "BinningSpec",
    "DegenerateBatchError",
    "EceReport",
    "EvalSet",
    "HardAssignment",
    "IngestionError",
    "LossSpec",
    "LossValueGrad",
    "MlpModel",
    "PredictionSummary",
    "SoftBinningSpec",
    "SweepRow",
    "SyntheticTask",
    "TASK_KINDS",
    "TemperatureFit",
    "TrainConfig",
    "TrainReport",
    "TrainingDivergedError",
    "apply_temperature",
    "argmax_stable",
    "assign_hard",
    "avuc",
    "avuc_grad",
    "bin_stats_hard",
    "bin_stats_soft",
    "composite_loss",
    "ece",
    "eval_convention_ece",
    "finite_diff_check",
    "finite_diff_grad",
    "fit_temperature",
    "focal",
    "forward_backward",
    "make_synthetic_task",
    "max_rel_error",
    "mse",
    "nll",
    "reliability_table",
    "s_avuc",
    "s_avuc_grad",
    "sb_ece",
    "sb_ece_confidence_grad",
    "sb_ece_grad",
    "soft_membership",
    "soft_membership_grad",
    "soft_uncertainty",
    "summarize",
    "sweep_one_at_a_time",
    "train",
]
