"""Metrics, marker localization and evaluation harnesses."""

from .markers import MarkerDetection, detect_marker
from .metrics import best_metrics, bootstrap_ci, pixel_metrics, ssim
from .predictors import (ConstantGrayPredictor, CopyLastPredictor,
                         DiffusionPredictor, EvalRequest, OraclePredictor)
from .protocols import (EvalProtocol, LocalizationReport, LocalizationRow,
                        MATRIX_CAVEAT, MatrixCell, MatrixReport, SpawnAnchor,
                        SpawnReport, TrajectoryTrace, anchor_times,
                        localization_eval, metric_matrix, spawn_eval,
                        success_thresholds, trajectory_eval)
from .transfer import TransferPoint, TransferStudy, transfer_study

__all__ = [
    "ConstantGrayPredictor", "CopyLastPredictor", "DiffusionPredictor",
    "EvalProtocol", "EvalRequest", "LocalizationReport", "LocalizationRow",
    "MATRIX_CAVEAT", "MarkerDetection", "MatrixCell", "MatrixReport",
    "OraclePredictor", "SpawnAnchor", "SpawnReport", "TrajectoryTrace",
    "TransferPoint", "TransferStudy", "anchor_times", "best_metrics",
    "bootstrap_ci", "detect_marker", "localization_eval", "metric_matrix",
    "pixel_metrics", "spawn_eval", "ssim", "success_thresholds",
    "trajectory_eval", "transfer_study",
]
