from .evaluation import (
    METRICS,
    Confusion,
    EvalReport,
    GridCell,
    cross_grid,
    evaluate,
    grid_frame,
    grid_key,
    grid_pivot,
    report_from_predictions,
)
from .linear import (
    LinearModel,
    binary_labels,
    load_features,
    load_model,
    predict,
    predict_proba,
    save_model,
    split_features,
    train,
)

__all__ = [
    "METRICS",
    "Confusion",
    "EvalReport",
    "GridCell",
    "LinearModel",
    "binary_labels",
    "cross_grid",
    "evaluate",
    "grid_frame",
    "grid_key",
    "grid_pivot",
    "load_features",
    "load_model",
    "predict",
    "predict_proba",
    "report_from_predictions",
    "save_model",
    "split_features",
    "train",
]
