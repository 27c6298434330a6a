import logging

import numpy as np
import pandas as pd
import pytest

from agtd.classify import (
    Confusion,
    EvalReport,
    cross_grid,
    evaluate,
    grid_frame,
    grid_key,
    grid_pivot,
    load_features,
    load_model,
    predict,
    predict_proba,
    report_from_predictions,
    save_model,
    split_features,
    train,
)
from agtd.errors import FeatureMismatchError, TrainingError


def _dataset(seed: int, n: int = 40, shift: float = 0.0, gap: float = 3.0):
    rng = np.random.default_rng(seed)
    y = np.array([0] * (n // 2) + [1] * (n // 2))
    X = rng.standard_normal((n, 2))
    X[y == 1] += gap
    X += shift
    return pd.DataFrame(X, columns=["f1", "f2"]), ["ai" if v else "human" for v in y]


SEPARABLE = pd.DataFrame({"x": [-2.0, -1.5, -1.0, 1.0, 1.5, 2.0]})
SEPARABLE_LABELS = ["human", "human", "human", "ai", "ai", "ai"]


# -- training ----------------------------------------------------------------


def test_separable_data_is_learned():
    model = train(SEPARABLE, SEPARABLE_LABELS)
    assert predict(model, SEPARABLE).tolist() == [0, 0, 0, 1, 1, 1]
    assert model.weights[0] > 0
    assert model.final_loss < 0.5


def test_flipping_labels_flips_weights():
    model = train(SEPARABLE, SEPARABLE_LABELS)
    flipped = train(SEPARABLE, ["ai" if l == "human" else "human" for l in SEPARABLE_LABELS])
    assert flipped.weights[0] == pytest.approx(-model.weights[0])


def test_duplicated_rows_give_the_same_model():
    X, y = _dataset(1)
    model = train(X, y)
    doubled = train(pd.concat([X, X], ignore_index=True), y + y)
    assert predict_proba(doubled, X) == pytest.approx(predict_proba(model, X), abs=1e-9)


def test_feature_scale_does_not_matter():
    X, y = _dataset(2)
    base = predict_proba(train(X, y), X)
    scaled = predict_proba(train(X * 1000.0, y), X * 1000.0)
    assert scaled == pytest.approx(base, abs=1e-9)


def test_training_is_deterministic():
    X, y = _dataset(3)
    assert train(X, y) == train(X, y)


def test_constant_columns_are_dropped(caplog):
    X, y = _dataset(4)
    X["flat"] = 7.0
    with caplog.at_level(logging.WARNING):
        model = train(X, y)
    assert model.dropped == ["flat"]
    assert model.feature_names == ["f1", "f2"]
    assert model.input_names == ["f1", "f2", "flat"]
    assert "flat" in caplog.text
    assert len(predict(model, X)) == len(X)


def test_training_errors():
    with pytest.raises(TrainingError):
        train(SEPARABLE, ["ai"] * 6)
    with pytest.raises(TrainingError):
        train(SEPARABLE.iloc[:4], ["human", "human", "human", "ai"])
    with pytest.raises(TrainingError):
        train(pd.DataFrame({"x": [0.0, np.nan, 1.0, 2.0]}), ["human", "human", "ai", "ai"])
    with pytest.raises(TrainingError):
        train(SEPARABLE, ["human", "human", "human", "ai", "ai", "robot"])
    with pytest.raises(TrainingError):
        train(pd.DataFrame({"x": [1.0] * 4}), ["human", "human", "ai", "ai"])


def test_feature_mismatch():
    model = train(SEPARABLE, SEPARABLE_LABELS)
    with pytest.raises(FeatureMismatchError):
        predict(model, SEPARABLE.rename(columns={"x": "y"}))


def test_split_features_drops_meta_columns():
    frame = pd.DataFrame({"doc_id": ["a", "b"], "label": ["ai", "human"], "f": [1.0, 2.0]})
    features, labels = split_features(frame)
    assert list(features.columns) == ["f"]
    assert labels.tolist() == [1, 0]


def test_model_file_round_trip(tmp_path):
    model = train(SEPARABLE, SEPARABLE_LABELS)
    path = tmp_path / "model.json"
    save_model(model, path)
    assert load_model(path) == model


def test_corrupt_model_file_is_a_training_error(tmp_path):
    path = tmp_path / "model.json"
    path.write_text('{"weights": [1.0]}', encoding="utf-8")
    with pytest.raises(TrainingError):
        load_model(path)


def test_load_features_keeps_ids_as_text(tmp_path):
    path = tmp_path / "feats.csv"
    path.write_text("doc_id,label,f\n007,ai,1.5\nNA,human,2.0\n", encoding="utf-8")
    frame = load_features(path)
    assert frame["doc_id"].tolist() == ["007", "NA"]
    assert frame["f"].tolist() == [1.5, 2.0]


def test_load_features_rejects_text_columns(tmp_path):
    path = tmp_path / "feats.csv"
    path.write_text("doc_id,label,f\na,ai,high\nb,human,low\n", encoding="utf-8")
    with pytest.raises(TrainingError, match="non-numeric"):
        load_features(path)


# -- metrics -----------------------------------------------------------------


def test_metric_example():
    report = report_from_predictions([1, 1, 0, 0], [1, 0, 0, 0])
    assert report.confusion == Confusion(tp=1, fp=0, tn=2, fn=1)
    assert report.as_percentages() == {"accuracy": 75.0, "precision": 100.0, "recall": 50.0, "f1": 66.667}


def test_zero_denominators_give_zero():
    report = report_from_predictions(["human", "human"], ["human", "human"])
    assert report.accuracy == 1.0
    assert report.precision == 0.0 and report.recall == 0.0 and report.f1 == 0.0


def test_metric_algebra():
    rng = np.random.default_rng(5)
    gold = rng.integers(0, 2, 200)
    pred = rng.integers(0, 2, 200)
    r = report_from_predictions(gold, pred)
    c = r.confusion
    assert c.total == 200
    assert r.accuracy == pytest.approx((c.tp + c.tn) / 200)
    assert r.f1 == pytest.approx(2 * r.precision * r.recall / (r.precision + r.recall))
    assert min(r.precision, r.recall) <= r.f1 <= max(r.precision, r.recall)


def test_from_confusion_matches_predictions():
    confusion = Confusion(tp=3, fp=1, tn=5, fn=1)
    assert EvalReport.from_confusion(confusion).precision == 0.75


def test_higher_threshold_predicts_fewer_positives():
    X, y = _dataset(6, gap=1.0)
    model = train(X, y)
    positives = [int(predict(model, X, threshold=t).sum()) for t in (0.1, 0.3, 0.5, 0.7, 0.9)]
    assert positives == sorted(positives, reverse=True)
    report = evaluate(model, X, y)
    assert 0.5 < report.accuracy <= 1.0


# -- cross-dataset grid ------------------------------------------------------


def test_grid_key():
    assert grid_key(("bbc", "gpt-4")) == "bbc/gpt-4"
    assert grid_key("ndtv") == "ndtv"


def test_cross_grid_covers_every_pair():
    datasets = {f"d{i}": _dataset(10 + i) for i in range(10)}
    cells = cross_grid(datasets, seed=1)
    assert len(cells) == 100
    assert [(c.train_key, c.test_key) for c in cells] == sorted((c.train_key, c.test_key) for c in cells)
    pivot = grid_pivot(cells)
    assert pivot.shape == (10, 10)


def test_duplicated_dataset_scores_alike():
    X, y = _dataset(20, gap=6.0)
    cells = {(c.train_key, c.test_key): c for c in cross_grid({"a": (X, y), "b": (X.copy(), list(y))}, seed=2)}
    f1_diag = cells[("a", "a")].report.f1
    f1_cross = cells[("a", "b")].report.f1
    assert abs(f1_diag - f1_cross) * 100 < 5.0


def test_shifted_dataset_degrades_off_diagonal():
    cells = {
        (c.train_key, c.test_key): c
        for c in cross_grid({"near": _dataset(30, gap=6.0), "far": _dataset(31, gap=6.0, shift=12.0)}, seed=3)
    }
    assert cells[("near", "near")].report.f1 >= cells[("near", "far")].report.f1
    assert cells[("near", "far")].report.precision == pytest.approx(0.5)


def test_cross_grid_is_deterministic():
    datasets = {"a": _dataset(40), "b": _dataset(41)}
    assert cross_grid(datasets, seed=4) == cross_grid(datasets, seed=4, threads=2)


def test_cross_grid_needs_two_datasets():
    with pytest.raises(TrainingError):
        cross_grid({"a": _dataset(50)})


def test_dataset_too_small_to_split():
    tiny = (pd.DataFrame({"f": [0.0, 0.1, 1.0, 1.1]}), ["human", "human", "ai", "ai"])
    with pytest.raises(TrainingError, match="held-out"):
        cross_grid({"a": tiny, "b": _dataset(51)})


def test_grid_frame_layout():
    cells = cross_grid({("bbc", "m1"): _dataset(60), ("bbc", "m2"): _dataset(61)}, seed=5)
    frame = grid_frame(cells)
    assert list(frame.columns) == ["train_key", "test_key", "accuracy", "precision", "recall", "f1", "tp", "fp", "tn", "fn"]
    assert set(frame["train_key"]) == {"bbc/m1", "bbc/m2"}
    assert frame["accuracy"].between(0, 100).all()
