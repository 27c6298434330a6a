import json

import numpy as np
import pandas as pd
import pytest

from cli.main import dispatch


def _write_corpus(path, n: int = 4) -> None:
    lines = []
    for i in range(n):
        lines.append(
            {
                "id": f"h{i}",
                "source": "bbc",
                "label": "human",
                "headline": f"Budget {i}",
                "text": (
                    f"The council met on 1{i}/05/2024 at 10:3{i}, and members, after a long debate, approved "
                    f"the budget for the coming year. Officials said the plan, which covers {i + 3} districts, "
                    "would start soon."
                ),
            }
        )
        lines.append(
            {
                "id": f"a{i}",
                "source": "bbc",
                "label": "ai",
                "model": "m1",
                "headline": f"Budget {i}",
                "text": f"The budget was approved. It covers {i + 3} districts. Work starts soon{'.' * (i % 2 + 1)}",
            }
        )
    path.write_text("".join(json.dumps(line) + "\n" for line in lines), encoding="utf-8")


def test_no_arguments_prints_usage(capsys):
    assert dispatch([]) == 1
    assert "Usage" in capsys.readouterr().err


def test_unknown_subcommand(capsys):
    assert dispatch(["frobnicate"]) == 1
    assert "frobnicate" in capsys.readouterr().err


def test_missing_input_file_is_usage_error(tmp_path):
    assert dispatch(["adi", "--pairs", str(tmp_path / "absent.jsonl"), "--out", str(tmp_path / "o.json")]) == 1


def test_unknown_config_key(tmp_path, fixtures_dir):
    config = tmp_path / "agtd.toml"
    config.write_text("bogus = 1\n", encoding="utf-8")
    argv = ["adi", "--pairs", str(fixtures_dir / "pairs.jsonl"), "--out", str(tmp_path / "o.json"), "--config", str(config)]
    assert dispatch(argv) == 1


def test_adi_end_to_end(tmp_path, fixtures_dir):
    out = tmp_path / "spectrum.json"
    argv = ["adi", "--human", str(fixtures_dir / "human.jsonl"), "--ai", str(fixtures_dir / "ai.jsonl"), "--out", str(out)]
    assert dispatch(argv) == 0

    payload = json.loads(out.read_text(encoding="utf-8"))
    assert payload["schema"] == "adi_spectrum"
    rows = {r["model"]: r for r in payload["rows"]}
    assert rows["m1"]["raw_mean_jsd"] == pytest.approx(0.03891, abs=1e-6)
    assert rows["m2"]["raw_mean_jsd"] == 0.0
    assert rows["m2"]["band"] == "difficult_to_detect"
    assert payload["meta"]["pairs"] == 3

    manifest = json.loads((tmp_path / "spectrum.manifest.json").read_text(encoding="utf-8"))
    assert manifest["command"] == "adi"
    assert set(manifest["input_hashes"]) == {str(fixtures_dir / "human.jsonl"), str(fixtures_dir / "ai.jsonl")}
    assert str(out) in manifest["outputs"]

    again = tmp_path / "again" / "spectrum.json"
    assert dispatch(argv[:-1] + [str(again)]) == 0
    assert again.read_bytes() == out.read_bytes()


def test_adi_csv_and_kl_comparison(tmp_path, fixtures_dir):
    out = tmp_path / "spectrum.csv"
    assert dispatch(["adi", "--pairs", str(fixtures_dir / "pairs.jsonl"), "--out", str(out), "--compare-kl"]) == 0
    frame = pd.read_csv(out)
    assert list(frame["model"]) == ["m2", "m1"]
    divergences = pd.read_csv(tmp_path / "spectrum.divergences.csv")
    assert divergences.set_index("model").loc["m1", "mean_kl"] == 1000.0


def test_adi_per_source_svg(tmp_path, fixtures_dir):
    out = tmp_path / "spectrum.svg"
    assert dispatch(["adi", "--pairs", str(fixtures_dir / "pairs.jsonl"), "--out", str(out), "--fit-scope", "per_source"]) == 0
    svg = out.read_text(encoding="utf-8")
    assert svg.count('id="bar-') == 2


def test_bad_corpus_is_a_data_error(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"id": "x"}\n', encoding="utf-8")
    assert dispatch(["adi", "--pairs", str(bad), "--out", str(tmp_path / "o.json")]) == 2


def test_watermark_pipeline(tmp_path):
    streams = tmp_path / "streams.jsonl"
    common = ["--vocab-size", "200", "--length", "60", "--n-streams", "5"]
    assert dispatch(["watermark", "simulate", "--out", str(streams), *common, "--delta", "4"]) == 0
    assert len(streams.read_text(encoding="utf-8").splitlines()) == 5

    detected = tmp_path / "detect.json"
    assert dispatch(["watermark", "detect", "--streams", str(streams), "--out", str(detected)]) == 0
    rows = json.loads(detected.read_text(encoding="utf-8"))["rows"]
    assert len(rows) == 5
    assert all(r["detected"] for r in rows)

    table = tmp_path / "tradeoff.csv"
    assert dispatch(
        ["watermark", "tradeoff", "--streams", str(streams), "--fractions", "0,0.5", "--out", str(table), "--threads", "2"]
    ) == 0
    frame = pd.read_csv(table)
    assert len(frame) == 10
    assert list(frame.columns[:7]) == ["fraction", "stream_id", "edit_distance", "bleu", "semantic_sim", "z", "p"]

    sweep = tmp_path / "sweep.json"
    assert dispatch(
        ["watermark", "tradeoff", "--gammas", "0.25,0.5", "--fractions", "0", "--n-streams", "2", "--out", str(sweep)]
    ) == 0
    assert {r["gamma"] for r in json.loads(sweep.read_text(encoding="utf-8"))["rows"]} == {0.25, 0.5}


def test_bad_fraction_list(tmp_path):
    assert dispatch(["watermark", "tradeoff", "--fractions", "0,half", "--out", str(tmp_path / "t.csv")]) == 1


def test_intrinsic_dim(tmp_path):
    points = np.random.default_rng(0).random((200, 3))
    cloud = tmp_path / "cloud.txt"
    cloud.write_text("200 3\n" + "\n".join(" ".join(f"{v:.9f}" for v in row) for row in points) + "\n", encoding="utf-8")
    out = tmp_path / "dim.json"
    assert dispatch(["intrinsic-dim", "--cloud", str(cloud), "--out", str(out), "--repeats", "1"]) == 0
    row = json.loads(out.read_text(encoding="utf-8"))["rows"][0]
    assert row["n_used"] == 200
    assert row["mle"] > 0
    assert row["phd_slope"] < 1


def test_features_train_eval(tmp_path):
    corpus = tmp_path / "corpus.jsonl"
    _write_corpus(corpus)
    feats = tmp_path / "feats.csv"
    assert dispatch(["features", "stylo", "--corpus", str(corpus), "--out", str(feats)]) == 0
    frame = pd.read_csv(feats)
    assert list(frame.columns[:2]) == ["doc_id", "label"]
    assert len(frame) == 8

    model = tmp_path / "model.json"
    assert dispatch(["train", "--features", str(feats), "--out", str(model)]) == 0
    assert "weights" in json.loads(model.read_text(encoding="utf-8"))

    report = tmp_path / "eval.json"
    assert dispatch(["eval", "--model", str(model), "--features", str(feats), "--out", str(report)]) == 0
    row = json.loads(report.read_text(encoding="utf-8"))["rows"][0]
    assert row["accuracy"] == 100.0
    assert row["confusion"] == {"tp": 4, "fp": 0, "tn": 4, "fn": 0}

    grid = tmp_path / "grid.csv"
    argv = ["cross-grid", "--dataset", f"bbc/m1={feats}", "--dataset", f"copy={feats}", "--out", str(grid)]
    assert dispatch(argv) == 0
    assert len(pd.read_csv(grid)) == 4
    pivot = pd.read_csv(tmp_path / "grid.f1.pivot.csv")
    assert list(pivot["train_key"]) == ["bbc/m1", "copy"]

    rendered = tmp_path / "eval.svg"
    assert dispatch(["report", "--input", str(report), "--out", str(rendered)]) == 0
    assert "agtd-data schema=eval" in rendered.read_text(encoding="utf-8")


def test_raidar_features_from_rewrites_file(tmp_path, fixtures_dir):
    rewrites = tmp_path / "rewrites.jsonl"
    rewrites.write_text(
        "".join(json.dumps({"id": i, "rewrites": ["x"] * 6}) + "\n" for i in ("n1", "n2")), encoding="utf-8"
    )
    out = tmp_path / "raidar.csv"
    argv = ["features", "raidar", "--corpus", str(fixtures_dir / "hindi.jsonl"), "--rewrites", str(rewrites), "--out", str(out)]
    assert dispatch(argv) == 0
    assert list(pd.read_csv(out).columns) == ["doc_id", "label", *[f"raidar_p{i}" for i in range(1, 7)]]


def test_bad_dataset_spec(tmp_path):
    assert dispatch(["cross-grid", "--dataset", "nokey", "--out", str(tmp_path / "g.csv")]) == 1


def test_verify_detects_changed_inputs(tmp_path, fixtures_dir):
    pairs = tmp_path / "pairs.jsonl"
    pairs.write_bytes((fixtures_dir / "pairs.jsonl").read_bytes())
    out = tmp_path / "spectrum.json"
    assert dispatch(["adi", "--pairs", str(pairs), "--out", str(out)]) == 0

    manifest = tmp_path / "spectrum.manifest.json"
    assert dispatch(["verify", str(manifest)]) == 0
    pairs.write_text(pairs.read_text(encoding="utf-8").replace("a b. a c.", "a b. a d.", 1), encoding="utf-8")
    assert dispatch(["verify", str(manifest)]) == 2


def _write_features(path, rows_per_class: int) -> None:
    lines = ["doc_id,label,f1"]
    for i in range(rows_per_class):
        lines.append(f"h{i},human,{i * 0.1:.1f}")
        lines.append(f"a{i},ai,{1 + i * 0.1:.1f}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def test_cloud_too_small_is_a_data_error(tmp_path):
    cloud = tmp_path / "cloud.txt"
    cloud.write_text("2 3\n0 0 0\n1 1 1\n", encoding="utf-8")
    assert dispatch(["intrinsic-dim", "--cloud", str(cloud), "--out", str(tmp_path / "dim.json")]) == 2


def test_out_of_vocabulary_stream_is_a_data_error(tmp_path):
    streams = tmp_path / "streams.json"
    streams.write_text('[{"vocab_size": 4, "tokens": [1, 9]}]', encoding="utf-8")
    assert dispatch(["watermark", "detect", "--streams", str(streams), "--out", str(tmp_path / "d.json")]) == 2


def test_unsplittable_dataset_is_a_data_error(tmp_path):
    small, large = tmp_path / "small.csv", tmp_path / "large.csv"
    _write_features(small, 2)
    _write_features(large, 10)
    argv = ["cross-grid", "--dataset", f"a={small}", "--dataset", f"b={large}", "--out", str(tmp_path / "g.csv")]
    assert dispatch(argv) == 2


def test_non_utf8_corpus_is_a_data_error(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_bytes(b'{"id": "\xff\xfe"}\n')
    assert dispatch(["adi", "--pairs", str(bad), "--out", str(tmp_path / "o.json")]) == 2


def test_report_writes_a_manifest(tmp_path, fixtures_dir):
    spectrum = tmp_path / "s.json"
    assert dispatch(["adi", "--pairs", str(fixtures_dir / "pairs.jsonl"), "--out", str(spectrum)]) == 0
    rendered = tmp_path / "r.svg"
    assert dispatch(["report", "--input", str(spectrum), "--out", str(rendered)]) == 0
    manifest = json.loads((tmp_path / "r.manifest.json").read_text(encoding="utf-8"))
    assert manifest["command"] == "report"
    assert list(manifest["input_hashes"]) == [str(spectrum)]
    assert str(rendered) in manifest["outputs"]


def test_manifest_records_config_and_rewrites_files(tmp_path, fixtures_dir):
    config = tmp_path / "agtd.toml"
    config.write_text("seed = 0\n", encoding="utf-8")
    out = tmp_path / "spectrum.json"
    argv = ["adi", "--pairs", str(fixtures_dir / "pairs.jsonl"), "--out", str(out), "--config", str(config)]
    assert dispatch(argv) == 0
    manifest = json.loads((tmp_path / "spectrum.manifest.json").read_text(encoding="utf-8"))
    assert set(manifest["input_hashes"]) == {str(fixtures_dir / "pairs.jsonl"), str(config)}

    rewrites = tmp_path / "rewrites.jsonl"
    rewrites.write_text(
        "".join(json.dumps({"id": i, "rewrites": ["x"] * 6}) + "\n" for i in ("n1", "n2")), encoding="utf-8"
    )
    config.write_text(f"rewrites_file = {json.dumps(str(rewrites))}\n", encoding="utf-8")
    feats = tmp_path / "raidar.csv"
    argv = ["features", "raidar", "--corpus", str(fixtures_dir / "hindi.jsonl"), "--out", str(feats), "--config", str(config)]
    assert dispatch(argv) == 0
    manifest = json.loads((tmp_path / "raidar.manifest.json").read_text(encoding="utf-8"))
    assert set(manifest["input_hashes"]) == {str(fixtures_dir / "hindi.jsonl"), str(rewrites), str(config)}


@pytest.mark.parametrize("line", ["threads = 0", 'watermark_gamma = "half"', "adi_band_thresholds = [70.0, 20.0]"])
def test_bad_config_value_is_a_usage_error(tmp_path, fixtures_dir, line):
    config = tmp_path / "agtd.toml"
    config.write_text(line + "\n", encoding="utf-8")
    argv = ["adi", "--pairs", str(fixtures_dir / "pairs.jsonl"), "--out", str(tmp_path / "o.json"), "--config", str(config)]
    assert dispatch(argv) == 1


def test_sentinel_from_config_reaches_the_report(tmp_path, fixtures_dir):
    config = tmp_path / "agtd.toml"
    config.write_text("kl_report_sentinel = 500.0\n", encoding="utf-8")
    out = tmp_path / "spectrum.json"
    argv = ["adi", "--pairs", str(fixtures_dir / "pairs.jsonl"), "--out", str(out), "--compare-kl", "--config", str(config)]
    assert dispatch(argv) == 0
    rows = json.loads((tmp_path / "spectrum.divergences.json").read_text(encoding="utf-8"))["rows"]
    assert {r["model"]: r["mean_kl"] for r in rows}["m1"] == 500.0


def test_adi_with_kl_measure(tmp_path, fixtures_dir):
    out = tmp_path / "spectrum.json"
    assert dispatch(["adi", "--pairs", str(fixtures_dir / "pairs.jsonl"), "--out", str(out), "--measure", "kl"]) == 0
    rows = json.loads(out.read_text(encoding="utf-8"))["rows"]
    assert [r["model"] for r in rows] == ["m2", "m1"]
    assert rows[1]["raw_mean_jsd"] == 1000.0
    assert rows[1]["adi"] == 0.0


def test_every_subcommand_reruns_byte_identically(tmp_path):
    corpus = tmp_path / "corpus.jsonl"
    _write_corpus(corpus)
    wm = ["--vocab-size", "200", "--length", "40", "--n-streams", "3"]
    streams = tmp_path / "streams.jsonl"
    assert dispatch(["watermark", "simulate", "--out", str(streams), *wm]) == 0
    cloud = tmp_path / "cloud.txt"
    points = np.random.default_rng(4).random((200, 3))
    cloud.write_text("200 3\n" + "\n".join(" ".join(f"{v:.9f}" for v in row) for row in points) + "\n", encoding="utf-8")
    feats = tmp_path / "feats.csv"
    assert dispatch(["features", "stylo", "--corpus", str(corpus), "--out", str(feats)]) == 0
    model = tmp_path / "model.json"
    assert dispatch(["train", "--features", str(feats), "--out", str(model)]) == 0
    report = tmp_path / "eval.json"
    assert dispatch(["eval", "--model", str(model), "--features", str(feats), "--out", str(report)]) == 0

    commands = {
        "streams.jsonl": lambda out: ["watermark", "simulate", "--out", str(out), *wm],
        "detect.json": lambda out: ["watermark", "detect", "--streams", str(streams), "--out", str(out)],
        "tradeoff.csv": lambda out: [
            "watermark", "tradeoff", "--streams", str(streams), "--fractions", "0,0.5", "--out", str(out), "--threads", "2"
        ],
        "dim.json": lambda out: ["intrinsic-dim", "--cloud", str(cloud), "--out", str(out), "--repeats", "1"],
        "stylo.csv": lambda out: ["features", "stylo", "--corpus", str(corpus), "--out", str(out)],
        "model.json": lambda out: ["train", "--features", str(feats), "--out", str(out)],
        "eval.json": lambda out: ["eval", "--model", str(model), "--features", str(feats), "--out", str(out)],
        "grid.csv": lambda out: ["cross-grid", "--dataset", f"a={feats}", "--dataset", f"b={feats}", "--out", str(out)],
        "eval.svg": lambda out: ["report", "--input", str(report), "--out", str(out)],
    }
    for name, argv_for in commands.items():
        first, second = tmp_path / "first" / name, tmp_path / "second" / name
        assert dispatch(argv_for(first)) == 0, name
        assert dispatch(argv_for(second)) == 0, name
        assert first.read_bytes() == second.read_bytes(), name
