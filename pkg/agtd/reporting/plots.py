import io
import logging
from typing import Callable, Dict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from agtd.errors import UnknownReportSchemaError
from agtd.reporting.render import Report, report_frame

logger = logging.getLogger(__name__)

_SVG_RC = {
    "svg.fonttype": "none",
    "svg.hashsalt": "agtd",
    "font.size": 9,
}
BAND_COLORS = {
    "easy_to_detect": "#d95f02",
    "detectable": "#7570b3",
    "difficult_to_detect": "#1b9e77",
}


def _numeric(frame: pd.DataFrame, column: str) -> np.ndarray:
    if column not in frame.columns:
        return np.array([], dtype=np.float64)
    return pd.to_numeric(frame[column], errors="coerce").to_numpy(dtype=np.float64)


def _plot_tradeoff(report: Report, frame: pd.DataFrame):
    threshold = float(report.meta.get("threshold", 0.01))
    metrics = [("edit_distance", "Edit distance"), ("bleu", "BLEU"), ("semantic_sim", "Semantic similarity")]
    fig, axes = plt.subplots(1, len(metrics), figsize=(12, 4), sharey=True)
    p = _numeric(frame, "p")
    for ax, (column, label) in zip(axes, metrics):
        x = _numeric(frame, column)
        keep = np.isfinite(x) & np.isfinite(p) if len(x) else np.array([], dtype=bool)
        ax.scatter(x[keep], p[keep], s=10, alpha=0.6, color="#1f77b4")
        ax.axhline(threshold, color="#888888", linestyle="--", linewidth=0.8)
        ax.set_xlabel(label)
        ax.set_title(f"{label} vs p-value")
    axes[0].set_ylabel("p-value")
    fig.suptitle("Distortion vs watermark detectability")
    return fig


def _plot_spectrum(report: Report, frame: pd.DataFrame):
    low, high = report.meta.get("thresholds", (33.3, 66.6))
    fig, ax = plt.subplots(figsize=(max(6, 0.8 * len(frame) + 3), 4.5))
    bands = [(0, low, "easy_to_detect"), (low, high, "detectable"), (high, 100, "difficult_to_detect")]
    for lo, hi, name in bands:
        ax.axhspan(lo, hi, color=BAND_COLORS[name], alpha=0.08)
        ax.text(1.01, (lo + hi) / 2, name, transform=ax.get_yaxis_transform(), va="center", fontsize=8)

    if len(frame):
        labels = [
            f"{g}/{m}" if "group" in frame.columns else str(m)
            for g, m in zip(frame.get("group", frame["model"]), frame["model"])
        ]
        adi = _numeric(frame, "adi")
        colors = [BAND_COLORS.get(b, "#999999") for b in frame["band"]]
        bars = ax.bar(range(len(labels)), adi, color=colors)
        for rect, label in zip(bars, labels):
            rect.set_gid(f"bar-{label}")
        for i, (value, band) in enumerate(zip(adi, frame["band"])):
            ax.text(i, value + 1.5, band, ha="center", fontsize=7, rotation=90)
        ax.set_xticks(range(len(labels)))
        ax.set_xticklabels(labels, rotation=45, ha="right")
    ax.set_ylim(0, 100)
    ax.set_ylabel("ADI (0-100)")
    ax.set_title("Detectability spectrum")
    fig.tight_layout()
    return fig


def _confusion_axes(ax, matrix: np.ndarray, xlabels, ylabels, title: str, fmt: str = "{:.0f}"):
    im = ax.imshow(matrix, cmap="Blues")
    ax.set_xticks(range(len(xlabels)))
    ax.set_xticklabels(xlabels, rotation=45, ha="right")
    ax.set_yticks(range(len(ylabels)))
    ax.set_yticklabels(ylabels)
    for (i, j), value in np.ndenumerate(matrix):
        ax.text(j, i, fmt.format(value), ha="center", va="center", fontsize=8)
    ax.set_title(title)
    return im


def _plot_eval(report: Report, frame: pd.DataFrame):
    n = max(1, len(frame))
    fig, axes = plt.subplots(1, n, figsize=(3.5 * n, 3.5), squeeze=False)
    for ax, (_, row) in zip(axes[0], frame.iterrows()):
        matrix = np.array([[row["tn"], row["fp"]], [row["fn"], row["tp"]]], dtype=np.float64)
        _confusion_axes(ax, matrix, ["pred human", "pred ai"], ["human", "ai"], f"F1 {row['f1']:.3f}%")
    return fig


def _plot_cross_grid(report: Report, frame: pd.DataFrame):
    if frame.empty:
        fig, ax = plt.subplots(figsize=(4, 4))
        ax.set_title("Cross-dataset F1 (%)")
        return fig
    pivot = frame.pivot(index="train_key", columns="test_key", values="f1")
    size = max(4, 0.7 * len(pivot.columns) + 2)
    fig, ax = plt.subplots(figsize=(size, size))
    im = _confusion_axes(ax, pivot.to_numpy(dtype=np.float64), pivot.columns, pivot.index, "Cross-dataset F1 (%)", "{:.1f}")
    ax.set_xlabel("test")
    ax.set_ylabel("train")
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    return fig


def _plot_divergences(report: Report, frame: pd.DataFrame):
    fig, ax = plt.subplots(figsize=(max(6, 0.8 * len(frame) + 3), 4))
    x = np.arange(len(frame))
    if len(frame):
        ax.bar(x - 0.2, _numeric(frame, "mean_jsd"), width=0.4, label="JSD")
        ax.bar(x + 0.2, _numeric(frame, "mean_kl"), width=0.4, label="KL (1000 = infinite)")
        ax.set_xticks(x)
        ax.set_xticklabels(frame["model"], rotation=45, ha="right")
        ax.set_yscale("symlog")
    ax.legend()
    ax.set_title("JSD vs KL per model")
    fig.tight_layout()
    return fig


def _plot_bars(title: str, columns) -> Callable:
    def _plot(report: Report, frame: pd.DataFrame):
        fig, ax = plt.subplots(figsize=(6, 4))
        x = np.arange(len(frame))
        width = 0.8 / len(columns)
        for k, column in enumerate(columns):
            ax.bar(x + (k - (len(columns) - 1) / 2) * width, _numeric(frame, column), width=width, label=column)
        ax.set_xticks(x)
        ax.legend()
        ax.set_title(title)
        return fig

    return _plot


def _plot_features(report: Report, frame: pd.DataFrame):
    fig, ax = plt.subplots(figsize=(8, 4))
    if len(frame) and "label" in frame.columns:
        features = [c for c in frame.columns if c not in ("doc_id", "label")]
        means = frame.groupby("label")[features].mean()
        # scale each feature by its largest class mean so columns are comparable
        scale = means.abs().max().replace(0, 1)
        (means / scale).T.plot.bar(ax=ax)
        ax.set_ylabel("class mean / max class mean")
    ax.set_title("Feature means by label")
    fig.tight_layout()
    return fig


PLOTTERS: Dict[str, Callable] = {
    "tradeoff": _plot_tradeoff,
    "adi_spectrum": _plot_spectrum,
    "eval": _plot_eval,
    "cross_grid": _plot_cross_grid,
    "divergence_comparison": _plot_divergences,
    "intrinsic_dim": _plot_bars("Intrinsic dimension", ["mle", "phd"]),
    "watermark": _plot_bars("Watermark z-scores", ["z"]),
    "features": _plot_features,
}


def _comment_safe(text: str) -> str:
    while "--" in text:
        text = text.replace("--", "- -")
    return text


def render_svg(report: Report, data_csv: str) -> str:
    """Self-contained SVG chart with the report's CSV embedded as a comment."""
    plotter = PLOTTERS.get(report.report_schema)
    if plotter is None:
        raise UnknownReportSchemaError(f"no chart for report schema {report.report_schema!r}")
    frame = report_frame(report)
    with matplotlib.rc_context(_SVG_RC):
        fig = plotter(report, frame)
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    svg = buf.getvalue()
    comment = f"<!-- agtd-data schema={report.report_schema}\n{_comment_safe(data_csv)}\n-->\n"
    head, sep, tail = svg.rpartition("</svg>")
    if not sep:
        raise UnknownReportSchemaError("matplotlib produced no SVG document")
    return head + comment + sep + tail
