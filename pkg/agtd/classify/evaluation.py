"""Metric suite and cross-dataset evaluation grids."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Hashable, List, Mapping, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict
from sklearn.metrics import confusion_matrix
from sklearn.model_selection import train_test_split

from agtd.classify.linear import LabelsLike, LinearModel, binary_labels, predict, train
from agtd.dataflows.utils import derive_seed
from agtd.errors import TrainingError

logger = logging.getLogger(__name__)

METRICS = ("accuracy", "precision", "recall", "f1")


class Confusion(BaseModel):
    model_config = ConfigDict(frozen=True)

    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


class EvalReport(BaseModel):
    """Metrics as fractions in [0, 1]; positive class is "ai"."""

    model_config = ConfigDict(frozen=True)

    accuracy: float
    precision: float
    recall: float
    f1: float
    confusion: Confusion

    @classmethod
    def from_confusion(cls, confusion: Confusion) -> "EvalReport":
        tp, fp, tn, fn = confusion.tp, confusion.fp, confusion.tn, confusion.fn
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        accuracy = (tp + tn) / confusion.total if confusion.total else 0.0
        return cls(accuracy=accuracy, precision=precision, recall=recall, f1=f1, confusion=confusion)

    def as_percentages(self) -> Dict[str, float]:
        return {m: round(100.0 * getattr(self, m), 3) for m in METRICS}

    def to_record(self) -> Dict:
        return {**self.as_percentages(), "confusion": self.confusion.model_dump()}


def report_from_predictions(gold: LabelsLike, predicted: LabelsLike) -> EvalReport:
    y_true = binary_labels(gold)
    y_pred = binary_labels(predicted)
    tn, fp, fn, tp = confusion_matrix(y_true, y_pred, labels=[0, 1]).ravel()
    return EvalReport.from_confusion(Confusion(tp=int(tp), fp=int(fp), tn=int(tn), fn=int(fn)))


def evaluate(
    model: LinearModel,
    features: Union[pd.DataFrame, np.ndarray],
    labels: LabelsLike,
    threshold: float = 0.5,
) -> EvalReport:
    return report_from_predictions(labels, predict(model, features, threshold=threshold))


class GridCell(BaseModel):
    model_config = ConfigDict(frozen=True)

    train_key: str
    test_key: str
    report: EvalReport

    def to_record(self) -> Dict:
        return {"train_key": self.train_key, "test_key": self.test_key, **self.report.to_record()}


def grid_key(key: Hashable) -> str:
    if isinstance(key, tuple):
        return "/".join(str(k) for k in key)
    return str(key)


Dataset = Tuple[pd.DataFrame, LabelsLike]


def cross_grid(
    datasets: Mapping[Hashable, Dataset],
    seed: int = 0,
    l2: float = 1e-3,
    epochs: int = 500,
    lr: float = 0.1,
    holdout_fraction: float = 0.2,
    threshold: float = 0.5,
    threads: int = 1,
) -> List[GridCell]:
    """Train on each dataset and test on every dataset.

    The diagonal is scored on a stratified held-out split of its own data;
    off-diagonal cells use the full foreign dataset. Cells are ordered by
    (train_key, test_key).
    """
    if len(datasets) < 2:
        raise TrainingError(f"cross_grid needs at least 2 datasets, got {len(datasets)}")
    prepared = {grid_key(k): (v[0], binary_labels(v[1])) for k, v in datasets.items()}
    if len(prepared) != len(datasets):
        raise TrainingError("dataset keys collide after joining with '/'")
    keys = sorted(prepared)

    def _fit(key: str) -> Tuple[LinearModel, pd.DataFrame, np.ndarray]:
        X, y = prepared[key]
        split_seed = derive_seed(seed, f"split:{key}") % (2**32)
        try:
            train_idx, test_idx = train_test_split(
                np.arange(len(y)), test_size=holdout_fraction, stratify=y, random_state=split_seed
            )
        except ValueError as e:
            raise TrainingError(f"dataset '{key}' cannot be split for a held-out diagonal: {e}") from e
        model = train(X.iloc[train_idx], y[train_idx], l2=l2, epochs=epochs, lr=lr, seed=seed)
        return model, X.iloc[test_idx], y[test_idx]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            fitted = dict(zip(keys, pool.map(_fit, keys)))
    else:
        fitted = {k: _fit(k) for k in keys}

    cells = []
    for train_key in keys:
        model, X_hold, y_hold = fitted[train_key]
        for test_key in keys:
            if test_key == train_key:
                report = evaluate(model, X_hold, y_hold, threshold)
            else:
                report = evaluate(model, *prepared[test_key], threshold)
            cells.append(GridCell(train_key=train_key, test_key=test_key, report=report))
    logger.info("cross_grid: %d x %d cells", len(keys), len(keys))
    return cells


def grid_frame(cells: Sequence[GridCell]) -> pd.DataFrame:
    rows = []
    for cell in cells:
        rows.append(
            {
                "train_key": cell.train_key,
                "test_key": cell.test_key,
                **cell.report.as_percentages(),
                **cell.report.confusion.model_dump(),
            }
        )
    columns = ["train_key", "test_key", *METRICS, "tp", "fp", "tn", "fn"]
    return pd.DataFrame(rows, columns=columns)


def grid_pivot(cells: Sequence[GridCell], metric: str = "f1") -> pd.DataFrame:
    """train_key rows x test_key columns for one metric, in percent."""
    if metric not in METRICS:
        raise ValueError(f"Unknown metric '{metric}' (expected one of {METRICS})")
    return grid_frame(cells).pivot(index="train_key", columns="test_key", values=metric)
