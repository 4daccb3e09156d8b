"""Favoritism analysis of automated preference metrics against human ratings."""

from .core import (
    LABELS,
    ConfusionMatrix,
    EvaluationSetting,
    Outcome,
    RatedItem,
    RatingLabel,
    SystemPair,
    confusion_from_setting,
    human_outcome,
    margin,
    metric_outcome,
    swap_systems,
    total_error,
)
from .scores import (
    ERROR_COST,
    FaviResult,
    favi_score,
    favi_score_margin_form,
    sample_sign_accuracy,
    system_sign_accuracy,
    system_sign_agreement,
)

__version__ = "0.1.0"

__all__ = [
    "LABELS",
    "ERROR_COST",
    "ConfusionMatrix",
    "EvaluationSetting",
    "FaviResult",
    "Outcome",
    "RatedItem",
    "RatingLabel",
    "SystemPair",
    "confusion_from_setting",
    "favi_score",
    "favi_score_margin_form",
    "human_outcome",
    "margin",
    "metric_outcome",
    "sample_sign_accuracy",
    "swap_systems",
    "system_sign_accuracy",
    "system_sign_agreement",
    "total_error",
]
