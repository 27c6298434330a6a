"""L2-regularized logistic regression trained by full-batch gradient descent."""

import json
import logging
import math
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, model_validator
from scipy.special import expit

from agtd.errors import FeatureMismatchError, TrainingError

logger = logging.getLogger(__name__)

META_COLUMNS = ("doc_id", "label")
POSITIVE_LABEL = "ai"

LabelsLike = Union[Sequence[int], Sequence[str], np.ndarray, pd.Series]


class LinearModel(BaseModel):
    weights: List[float]
    bias: float
    feature_names: List[str]
    input_names: List[str]
    means: List[float]
    stds: List[float]
    dropped: List[str] = []
    final_loss: float = math.nan
    seed: int = 0

    @model_validator(mode="after")
    def _aligned(self) -> "LinearModel":
        n = len(self.feature_names)
        if not (len(self.weights) == len(self.means) == len(self.stds) == n):
            raise ValueError("weights, means and stds must align with feature_names")
        if any(s <= 0 for s in self.stds):
            raise ValueError("standard deviations must be positive")
        return self


def binary_labels(labels: LabelsLike) -> np.ndarray:
    """Map labels to {0, 1} with "ai" (or 1/True) as the positive class."""
    out = []
    for v in list(labels):
        if isinstance(v, str):
            if v not in ("ai", "human"):
                raise TrainingError(f"unknown label '{v}' (expected 'ai' or 'human')")
            out.append(1 if v == POSITIVE_LABEL else 0)
        elif v in (0, 1):
            out.append(int(v))
        else:
            raise TrainingError(f"label {v!r} is not binary")
    return np.asarray(out, dtype=np.int64)


def split_features(frame: pd.DataFrame) -> Tuple[pd.DataFrame, np.ndarray]:
    """Separate a feature-matrix frame into its feature columns and binary labels."""
    if "label" not in frame.columns:
        raise TrainingError("feature matrix has no 'label' column")
    features = frame.drop(columns=[c for c in META_COLUMNS if c in frame.columns])
    return features, binary_labels(frame["label"])


def load_features(path: Union[str, Path]) -> pd.DataFrame:
    """Read a feature CSV written by `feature_matrix`; every non-meta column must be numeric."""
    try:
        frame = pd.read_csv(path, keep_default_na=False, dtype={"doc_id": str, "label": str})
    except ValueError as e:
        raise TrainingError(f"{path}: unreadable feature CSV ({e})") from e
    non_numeric = [c for c in frame.columns if c not in META_COLUMNS and not pd.api.types.is_numeric_dtype(frame[c])]
    if non_numeric:
        raise TrainingError(f"{path}: non-numeric feature columns {non_numeric}")
    return frame


def _as_frame(features: Union[pd.DataFrame, np.ndarray]) -> pd.DataFrame:
    if isinstance(features, pd.DataFrame):
        return features
    arr = np.asarray(features, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    return pd.DataFrame(arr, columns=[f"x{i}" for i in range(arr.shape[1])])


def _log_loss(z: np.ndarray, y: np.ndarray, w: np.ndarray, l2: float) -> float:
    # log(1 + e^z) - y z, stable for large |z|
    per_row = np.logaddexp(0.0, z) - y * z
    return math.fsum(per_row) / len(y) + 0.5 * l2 * float(w @ w)


def train(
    features: Union[pd.DataFrame, np.ndarray],
    labels: LabelsLike,
    l2: float = 1e-3,
    epochs: int = 500,
    lr: float = 0.1,
    seed: int = 0,
) -> LinearModel:
    frame = _as_frame(features)
    y = binary_labels(labels)
    if len(y) != len(frame):
        raise TrainingError(f"{len(frame)} feature rows but {len(y)} labels")
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise TrainingError(f"training data holds a single class ({n_pos} ai, {n_neg} human)")
    if n_pos < 2 or n_neg < 2:
        raise TrainingError(f"need at least 2 examples per class, got {n_pos} ai and {n_neg} human")

    X = frame.to_numpy(dtype=np.float64)
    if not np.all(np.isfinite(X)):
        raise TrainingError("features contain non-finite values")

    means = X.mean(axis=0)
    stds = X.std(axis=0)
    keep = stds > 0
    names = [str(c) for c in frame.columns]
    dropped = [n for n, k in zip(names, keep) if not k]
    if dropped:
        logger.warning("Dropping constant feature columns: %s", ", ".join(dropped))
    if not keep.any():
        raise TrainingError("every feature column is constant")

    Xs = (X[:, keep] - means[keep]) / stds[keep]
    yf = y.astype(np.float64)
    w = np.zeros(Xs.shape[1])
    b = 0.0
    for _ in range(epochs):
        residual = expit(Xs @ w + b) - yf
        w = w - lr * (Xs.T @ residual / len(yf) + l2 * w)
        b = b - lr * float(residual.mean())
    loss = _log_loss(Xs @ w + b, yf, w, l2)
    logger.debug("Trained on %d rows x %d features, final loss %.6f", Xs.shape[0], Xs.shape[1], loss)

    return LinearModel(
        weights=w.tolist(),
        bias=b,
        feature_names=[n for n, k in zip(names, keep) if k],
        input_names=names,
        means=means[keep].tolist(),
        stds=stds[keep].tolist(),
        dropped=dropped,
        final_loss=loss,
        seed=seed,
    )


def _design(model: LinearModel, features: Union[pd.DataFrame, np.ndarray]) -> np.ndarray:
    frame = _as_frame(features)
    names = [str(c) for c in frame.columns]
    if names != model.input_names:
        raise FeatureMismatchError(
            f"feature columns {names} do not match the model's {model.input_names}"
        )
    X = frame[model.feature_names].to_numpy(dtype=np.float64)
    return (X - np.asarray(model.means)) / np.asarray(model.stds)


def predict_proba(model: LinearModel, features: Union[pd.DataFrame, np.ndarray]) -> np.ndarray:
    return expit(_design(model, features) @ np.asarray(model.weights) + model.bias)


def predict(model: LinearModel, features: Union[pd.DataFrame, np.ndarray], threshold: float = 0.5) -> np.ndarray:
    return (predict_proba(model, features) >= threshold).astype(np.int64)


def save_model(model: LinearModel, path: Union[str, Path]) -> None:
    Path(path).write_text(model.model_dump_json(indent=2) + "\n", encoding="utf-8")


def load_model(path: Union[str, Path]) -> LinearModel:
    try:
        return LinearModel.model_validate(json.loads(Path(path).read_text(encoding="utf-8")))
    except ValueError as e:
        raise TrainingError(f"{path}: not a saved model ({e})") from e
