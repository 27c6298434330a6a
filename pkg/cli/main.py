import logging
import sys
from pathlib import Path
from typing import Annotated, Dict, List, Optional, Sequence

import click
import typer
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

from agtd.adi import adi_spectrum, compare_divergences, corpus_adi, group_pairs, grouped_adi_spectrum
from agtd.classify import (
    METRICS,
    cross_grid as run_cross_grid,
    evaluate,
    grid_key,
    grid_pivot,
    load_features,
    load_model,
    save_model,
    split_features,
    train as train_model,
)
from agtd.dataflows.corpus import load_corpus, pair_documents, split_by_label
from agtd.dataflows.point_cloud import load_point_cloud
from agtd.dataflows.utils import derive_seed, save_output
from agtd.errors import AGTDError
from agtd.features import feature_matrix
from agtd.geometry import estimate_intrinsic_dimension
from agtd.numerics import lambda_grid
from agtd.reporting import load_report, render_report
from agtd.watermark import (
    detect,
    dump_streams,
    gamma_sweep,
    load_streams,
    median_p_by_fraction,
    rewrite_tradeoff,
    simulate_stream,
    tradeoff_curve,
)
from cli.models import FeatureKind, FitScope, Measure, OutputFormat
from cli.utils import (
    console,
    parse_float_list,
    resolve_config,
    resolve_format,
    setup_logging,
    start_manifest,
    summary_table,
    verify_manifest,
    write_manifest,
)

logger = logging.getLogger("agtd.cli")

app = typer.Typer(
    name="agtd",
    help="agtd: detectability, watermark robustness and embedding geometry of AI-generated text",
    add_completion=False,
)
watermark_app = typer.Typer(help="Green-list watermark simulation, detection and robustness tables")
app.add_typer(watermark_app, name="watermark")

_state = {"progress": False}

ConfigOpt = Annotated[
    Optional[Path],
    typer.Option("--config", exists=True, dir_okay=False, help="TOML file of key = value config overrides"),
]
SeedOpt = Annotated[Optional[int], typer.Option("--seed", help="Master seed; subsystem seeds derive from it")]
ThreadsOpt = Annotated[Optional[int], typer.Option("--threads", min=1, help="Worker threads")]
OutOpt = Annotated[Path, typer.Option("--out", help="Primary output file")]
FormatOpt = Annotated[Optional[OutputFormat], typer.Option("--format", help="Output format (default: from --out suffix)")]


@app.callback()
def main_callback(
    verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Debug logging")] = False,
    progress: Annotated[bool, typer.Option("--progress", help="Show progress bars")] = False,
):
    setup_logging(verbose)
    _state["progress"] = progress


def _load_documents(pairs: Optional[Path], human: Optional[Path], ai: Optional[Path]):
    if pairs is not None:
        return split_by_label(load_corpus(pairs))
    if human is None or ai is None:
        raise typer.BadParameter("give --pairs, or both --human and --ai")
    humans, stray_ai = split_by_label(load_corpus(human))
    stray_human, ais = split_by_label(load_corpus(ai))
    if stray_ai or stray_human:
        logger.warning("Ignoring %d ai docs in --human and %d human docs in --ai", len(stray_ai), len(stray_human))
    return humans, ais


@app.command()
def adi(
    out: OutOpt,
    human: Annotated[Optional[Path], typer.Option("--human", exists=True, dir_okay=False, help="JSON-lines human corpus")] = None,
    ai: Annotated[Optional[Path], typer.Option("--ai", exists=True, dir_okay=False, help="JSON-lines AI corpus")] = None,
    pairs: Annotated[Optional[Path], typer.Option("--pairs", exists=True, dir_okay=False, help="JSON-lines corpus holding both labels")] = None,
    fmt: FormatOpt = None,
    measure: Annotated[Optional[Measure], typer.Option("--measure")] = None,
    fit_scope: Annotated[Optional[FitScope], typer.Option("--fit-scope")] = None,
    compare_kl: Annotated[bool, typer.Option("--compare-kl", help="Also write mean JSD vs mean KL per model")] = False,
    config_path: ConfigOpt = None,
    seed: SeedOpt = None,
    threads: ThreadsOpt = None,
):
    """Rank AI models on the 0-100 detectability spectrum."""
    config = resolve_config(
        config_path,
        {
            "adi_measure": measure.value if measure else None,
            "adi_fit_scope": fit_scope.value if fit_scope else None,
            "seed": seed,
            "threads": threads,
        },
    )
    manifest = start_manifest("adi", config, config["seed"], [pairs, human, ai], config_path=config_path)
    humans, ais = _load_documents(pairs, human, ai)
    paired = pair_documents(humans, ais)

    per_source = config["adi_fit_scope"] == FitScope.PER_SOURCE.value
    groups = group_pairs(paired.pairs, by_source=per_source)
    raw = {
        key: corpus_adi(
            groups[key],
            model=grid_key(key),
            measure=config["adi_measure"],
            base=config["divergence_base"],
            threads=config["threads"],
            progress=_state["progress"],
        )
        for key in sorted(groups)
    }
    thresholds = tuple(config["adi_band_thresholds"])
    fit = {
        "grid": lambda_grid(*config["yeo_johnson_grid"]),
        "inf_value": config["kl_report_sentinel"] if config["adi_measure"] == Measure.KL.value else None,
    }
    if per_source:
        spectrum = grouped_adi_spectrum(raw, scope="per_source", thresholds=thresholds, **fit)
        scores = [s for group in spectrum.values() for s in group]
    else:
        spectrum = scores = adi_spectrum(raw, thresholds=thresholds, **fit)

    fmt_value = resolve_format(out, fmt)
    meta = {
        "measure": config["adi_measure"],
        "fit_scope": config["adi_fit_scope"],
        "thresholds": list(thresholds),
        "base": config["divergence_base"],
        "pairs": len(paired.pairs),
        "unmatched": paired.n_unmatched,
    }
    render_report(spectrum, fmt_value, out, schema="adi_spectrum", meta=meta, float_format=config["float_format"])
    outputs = [out]

    if compare_kl:
        comparison = compare_divergences(group_pairs(paired.pairs), base=config["divergence_base"])
        cmp_out = out.with_name(f"{out.stem}.divergences{out.suffix}")
        render_report(comparison, fmt_value, cmp_out, schema="divergence_comparison", float_format=config["float_format"])
        outputs.append(cmp_out)

    console.print(
        summary_table(
            "Detectability spectrum",
            ["rank", "model", "raw", "ADI", "band"],
            [(s.rank, s.model, s.raw_mean_jsd, s.adi, s.band.value) for s in scores],
        )
    )
    write_manifest(manifest, out, outputs)


@watermark_app.command("simulate")
def watermark_simulate(
    out: OutOpt,
    vocab_size: Annotated[Optional[int], typer.Option("--vocab-size", min=2)] = None,
    length: Annotated[Optional[int], typer.Option("--length", min=2)] = None,
    n_streams: Annotated[Optional[int], typer.Option("--n-streams", min=1)] = None,
    gamma: Annotated[Optional[float], typer.Option("--gamma")] = None,
    delta: Annotated[Optional[float], typer.Option("--delta", min=0.0)] = None,
    key: Annotated[Optional[int], typer.Option("--key")] = None,
    config_path: ConfigOpt = None,
    seed: SeedOpt = None,
):
    """Write synthetic watermarked token streams, one JSON object per line."""
    config = resolve_config(
        config_path,
        {
            "vocab_size": vocab_size,
            "stream_length": length,
            "n_streams": n_streams,
            "watermark_gamma": gamma,
            "watermark_delta": delta,
            "watermark_key": key,
            "seed": seed,
        },
    )
    manifest = start_manifest("watermark simulate", config, config["seed"], [], config_path=config_path)
    streams = _simulate(config, derive_seed(config["seed"], "watermark:simulate"))
    out.parent.mkdir(parents=True, exist_ok=True)
    dump_streams(streams, str(out))
    logger.info("Wrote %d streams to %s", len(streams), out)
    write_manifest(manifest, out, [out])


def _simulate(config: Dict, base_seed: int):
    return [
        simulate_stream(
            config["vocab_size"],
            config["stream_length"],
            config["watermark_gamma"],
            config["watermark_delta"],
            config["watermark_key"],
            derive_seed(base_seed, f"stream:{i}"),
        )
        for i in range(config["n_streams"])
    ]


@watermark_app.command("detect")
def watermark_detect(
    out: OutOpt,
    streams: Annotated[Path, typer.Option("--streams", exists=True, dir_okay=False)],
    fmt: FormatOpt = None,
    gamma: Annotated[Optional[float], typer.Option("--gamma")] = None,
    key: Annotated[Optional[int], typer.Option("--key")] = None,
    threshold: Annotated[Optional[float], typer.Option("--threshold")] = None,
    ignore_repeated_bigrams: Annotated[bool, typer.Option("--ignore-repeated-bigrams")] = False,
    config_path: ConfigOpt = None,
):
    """Score each stream for the green-list watermark."""
    config = resolve_config(
        config_path, {"watermark_gamma": gamma, "watermark_key": key, "watermark_threshold": threshold}
    )
    manifest = start_manifest("watermark detect", config, config["seed"], [streams], config_path=config_path)
    reports = [
        detect(
            s,
            config["watermark_gamma"],
            config["watermark_key"],
            threshold=config["watermark_threshold"],
            ignore_repeated_bigrams=ignore_repeated_bigrams,
        )
        for s in load_streams(str(streams))
    ]
    render_report(reports, resolve_format(out, fmt), out, schema="watermark", float_format=config["float_format"])
    detected = sum(r.detected for r in reports)
    console.print(f"[bold]{detected}[/bold] of {len(reports)} streams carry the watermark (p < {config['watermark_threshold']})")
    write_manifest(manifest, out, [out])


@watermark_app.command("tradeoff")
def watermark_tradeoff(
    out: OutOpt,
    streams: Annotated[Optional[Path], typer.Option("--streams", exists=True, dir_okay=False, help="Watermarked streams (default: simulate)")] = None,
    rewrites: Annotated[Optional[Path], typer.Option("--rewrites", exists=True, dir_okay=False, help="Externally paraphrased streams, same order")] = None,
    fractions: Annotated[Optional[str], typer.Option("--fractions", help="e.g. 0,0.25,0.5")] = None,
    gammas: Annotated[Optional[str], typer.Option("--gammas", help="Sweep these green-list fractions")] = None,
    fmt: FormatOpt = None,
    gamma: Annotated[Optional[float], typer.Option("--gamma")] = None,
    delta: Annotated[Optional[float], typer.Option("--delta", min=0.0)] = None,
    key: Annotated[Optional[int], typer.Option("--key")] = None,
    n_streams: Annotated[Optional[int], typer.Option("--n-streams", min=1)] = None,
    config_path: ConfigOpt = None,
    seed: SeedOpt = None,
    threads: ThreadsOpt = None,
):
    """Distortion versus detectability under token substitution or external paraphrase."""
    config = resolve_config(
        config_path,
        {
            "perturb_fractions": parse_float_list(fractions, "--fractions"),
            "watermark_gamma": gamma,
            "watermark_delta": delta,
            "watermark_key": key,
            "n_streams": n_streams,
            "seed": seed,
            "threads": threads,
        },
    )
    manifest = start_manifest(
        "watermark tradeoff", config, config["seed"], [streams, rewrites], config_path=config_path
    )
    gamma_list = parse_float_list(gammas, "--gammas")
    common = dict(threshold=config["watermark_threshold"], max_n=config["bleu_max_n"])

    if gamma_list:
        points = gamma_sweep(
            gamma_list,
            config["n_streams"],
            config["vocab_size"],
            config["stream_length"],
            config["watermark_delta"],
            config["watermark_key"],
            config["perturb_fractions"],
            derive_seed(config["seed"], "watermark:sweep"),
            threads=config["threads"],
            progress=_state["progress"],
            **common,
        )
    else:
        originals = (
            load_streams(str(streams)) if streams else _simulate(config, derive_seed(config["seed"], "watermark:simulate"))
        )
        if rewrites:
            points = rewrite_tradeoff(
                originals, load_streams(str(rewrites)), config["watermark_gamma"], config["watermark_key"], **common
            )
        else:
            points = tradeoff_curve(
                originals,
                config["perturb_fractions"],
                config["watermark_gamma"],
                config["watermark_key"],
                derive_seed(config["seed"], "watermark:tradeoff"),
                threads=config["threads"],
                progress=_state["progress"],
                **common,
            )

    render_report(
        points,
        resolve_format(out, fmt),
        out,
        schema="tradeoff",
        meta={"threshold": config["watermark_threshold"]},
        float_format=config["float_format"],
    )
    if points and not gamma_list:
        medians = median_p_by_fraction(points)
        console.print(summary_table("Median p by fraction", ["fraction", "median p"], [(float(f), float(p)) for f, p in medians.items()]))
    write_manifest(manifest, out, [out])


@app.command("intrinsic-dim")
def intrinsic_dim(
    out: OutOpt,
    cloud: Annotated[Path, typer.Option("--cloud", exists=True, dir_okay=False, help="'n d' text or JSON points")],
    fmt: FormatOpt = None,
    k: Annotated[Optional[int], typer.Option("--k", min=2)] = None,
    min_subset: Annotated[Optional[int], typer.Option("--min-subset", min=2)] = None,
    n_sizes: Annotated[Optional[int], typer.Option("--n-sizes", min=2)] = None,
    repeats: Annotated[Optional[int], typer.Option("--repeats", min=1)] = None,
    config_path: ConfigOpt = None,
    seed: SeedOpt = None,
    threads: ThreadsOpt = None,
):
    """MLE and PHD intrinsic dimension of an embedding point cloud."""
    config = resolve_config(
        config_path,
        {
            "mle_k": k,
            "phd_min_subset": min_subset,
            "phd_n_sizes": n_sizes,
            "phd_repeats": repeats,
            "seed": seed,
            "threads": threads,
        },
    )
    manifest = start_manifest("intrinsic-dim", config, config["seed"], [cloud], config_path=config_path)
    report = estimate_intrinsic_dimension(
        load_point_cloud(cloud),
        k=config["mle_k"],
        min_subset=config["phd_min_subset"],
        n_sizes=config["phd_n_sizes"],
        repeats=config["phd_repeats"],
        rng_seed=derive_seed(config["seed"], "geometry:phd"),
        threads=config["threads"],
        progress=_state["progress"],
        max_points=config["mst_max_points"],
    )
    render_report(report, resolve_format(out, fmt), out, schema="intrinsic_dim", float_format=config["float_format"])
    console.print(
        summary_table(
            "Intrinsic dimension",
            ["MLE", "PHD", "slope", "r2", "n"],
            [(report.mle, report.phd, report.phd_slope, report.phd_r2, report.n_used)],
        )
    )
    write_manifest(manifest, out, [out])


@app.command()
def features(
    kind: Annotated[FeatureKind, typer.Argument(help="raidar or stylo")],
    out: OutOpt,
    corpus: Annotated[
        Optional[List[Path]], typer.Option("--corpus", exists=True, dir_okay=False, help="JSON-lines corpus (repeatable)")
    ] = None,
    rewrites: Annotated[Optional[Path], typer.Option("--rewrites", exists=True, dir_okay=False, help="Precomputed rewrites, JSON lines {id, rewrites}")] = None,
    rewriter_command: Annotated[Optional[str], typer.Option("--rewriter-command", help="External rewriter, {prompt} placeholder")] = None,
    fmt: FormatOpt = None,
    config_path: ConfigOpt = None,
    threads: ThreadsOpt = None,
):
    """Extract a doc_id/label/feature matrix."""
    if not corpus:
        raise typer.BadParameter("at least one --corpus is required", param_hint="--corpus")
    config = resolve_config(
        config_path,
        {
            "rewrites_file": str(rewrites) if rewrites else None,
            "rewriter_command": rewriter_command,
            "threads": threads,
        },
    )
    read_rewrites = config["rewrites_file"] if kind is FeatureKind.RAIDAR else None
    manifest = start_manifest(f"features {kind.value}", config, config["seed"], [*corpus, read_rewrites], config_path=config_path)
    documents = [doc for path in corpus for doc in load_corpus(path)]
    frame = feature_matrix(documents, extractor=kind.value, threads=config["threads"], progress=_state["progress"])
    render_report(frame, resolve_format(out, fmt, default="csv"), out, schema="features", float_format=config["float_format"])
    write_manifest(manifest, out, [out])


@app.command()
def train(
    features_csv: Annotated[Path, typer.Option("--features", exists=True, dir_okay=False)],
    out: Annotated[Path, typer.Option("--out", help="Model JSON")],
    l2: Annotated[Optional[float], typer.Option("--l2", min=0.0)] = None,
    epochs: Annotated[Optional[int], typer.Option("--epochs", min=1)] = None,
    lr: Annotated[Optional[float], typer.Option("--lr")] = None,
    config_path: ConfigOpt = None,
    seed: SeedOpt = None,
):
    """Fit the logistic detector on a feature matrix."""
    config = resolve_config(config_path, {"l2": l2, "epochs": epochs, "lr": lr, "seed": seed})
    manifest = start_manifest("train", config, config["seed"], [features_csv], config_path=config_path)
    X, y = split_features(load_features(features_csv))
    model = train_model(X, y, l2=config["l2"], epochs=config["epochs"], lr=config["lr"], seed=derive_seed(config["seed"], "classify:train"))
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, out)
    console.print(f"Trained on {len(y)} rows, {len(model.feature_names)} features, final loss {model.final_loss:.6f}")
    write_manifest(manifest, out, [out])


@app.command("eval")
def eval_command(
    model_path: Annotated[Path, typer.Option("--model", exists=True, dir_okay=False)],
    features_csv: Annotated[Path, typer.Option("--features", exists=True, dir_okay=False)],
    out: OutOpt,
    fmt: FormatOpt = None,
    threshold: Annotated[Optional[float], typer.Option("--threshold")] = None,
    config_path: ConfigOpt = None,
):
    """Accuracy, precision, recall and F1 of a trained model."""
    config = resolve_config(config_path, {"decision_threshold": threshold})
    manifest = start_manifest("eval", config, config["seed"], [model_path, features_csv], config_path=config_path)
    X, y = split_features(load_features(features_csv))
    report = evaluate(load_model(model_path), X, y, threshold=config["decision_threshold"])
    render_report(report, resolve_format(out, fmt), out, schema="eval", float_format=config["float_format"])
    pct = report.as_percentages()
    console.print(summary_table("Evaluation (%)", list(pct), [list(pct.values())]))
    write_manifest(manifest, out, [out])


def _parse_datasets(specs: Sequence[str]) -> Dict[str, Path]:
    datasets: Dict[str, Path] = {}
    for spec in specs:
        key, sep, path = spec.partition("=")
        if not sep or not key or not path:
            raise typer.BadParameter(f"expected KEY=PATH, got '{spec}'", param_hint="--dataset")
        if not Path(path).is_file():
            raise typer.BadParameter(f"file '{path}' does not exist", param_hint="--dataset")
        datasets[key] = Path(path)
    return datasets


@app.command("cross-grid")
def cross_grid(
    dataset: Annotated[List[str], typer.Option("--dataset", help="KEY=features.csv, e.g. bbc/gpt4=bbc_gpt4.csv")],
    out: OutOpt,
    fmt: FormatOpt = None,
    config_path: ConfigOpt = None,
    seed: SeedOpt = None,
    threads: ThreadsOpt = None,
):
    """Train on every dataset, test on every dataset."""
    config = resolve_config(config_path, {"seed": seed, "threads": threads})
    paths = _parse_datasets(dataset)
    manifest = start_manifest("cross-grid", config, config["seed"], list(paths.values()), config_path=config_path)
    datasets = {key: split_features(load_features(path)) for key, path in paths.items()}
    cells = run_cross_grid(
        datasets,
        seed=derive_seed(config["seed"], "classify:grid"),
        l2=config["l2"],
        epochs=config["epochs"],
        lr=config["lr"],
        holdout_fraction=config["holdout_fraction"],
        threshold=config["decision_threshold"],
        threads=config["threads"],
    )
    render_report(cells, resolve_format(out, fmt), out, schema="cross_grid", float_format=config["float_format"])
    outputs = [out]
    for metric in METRICS:
        pivot_path = out.with_name(f"{out.stem}.{metric}.pivot.csv")
        save_output(grid_pivot(cells, metric).reset_index(), pivot_path, config["float_format"])
        outputs.append(pivot_path)
    write_manifest(manifest, out, outputs)


@app.command()
def report(
    input_path: Annotated[Path, typer.Option("--input", exists=True, dir_okay=False, help="JSON report written by agtd")],
    out: OutOpt,
    fmt: FormatOpt = None,
):
    """Re-render a saved JSON report as json, csv or svg."""
    config = resolve_config(None, {})
    manifest = start_manifest("report", config, config["seed"], [input_path])
    loaded = load_report(input_path)
    render_report(loaded, resolve_format(out, fmt), out)
    write_manifest(manifest, out, [out])


@app.command()
def verify(manifest: Annotated[Path, typer.Argument(exists=True, dir_okay=False)]):
    """Check that every input recorded in a run manifest is unchanged."""
    m = verify_manifest(manifest)
    console.print(f"[green]OK[/green] {m.command}: {len(m.input_hashes)} inputs match")


def dispatch(argv: Sequence[str]) -> int:
    """Run one CLI invocation and map the outcome to 0 / 1 (usage) / 2 (data)."""
    command = typer.main.get_command(app)
    if not argv:
        with click.Context(command, info_name="agtd") as ctx:
            click.echo(ctx.get_help(), err=True)
        return 1
    try:
        result = command.main(args=list(argv), prog_name="agtd", standalone_mode=False)
    except click.exceptions.UsageError as e:
        e.show()
        return 1
    except click.exceptions.ClickException as e:
        e.show()
        return 1
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.exceptions.Abort:
        return 1
    except AGTDError as e:
        logger.error("%s", e)
        return 2
    return result if isinstance(result, int) else 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
