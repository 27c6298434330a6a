"""Turn module results into canonical JSON, CSV or SVG files."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

import pandas as pd
from pydantic import BaseModel, Field, ValidationError

from agtd.adi.spectrum import DetectabilityScore, DivergenceComparison
from agtd.classify.evaluation import EvalReport, GridCell
from agtd.dataflows.config import get_config
from agtd.dataflows.utils import canonicalize, dumps_canonical
from agtd.errors import UnknownReportSchemaError
from agtd.geometry.intrinsic_dim import IntrinsicDimReport
from agtd.watermark.green_list import WatermarkReport
from agtd.watermark.tradeoff import TRADEOFF_COLUMNS, TradeoffPoint, tradeoff_frame

logger = logging.getLogger(__name__)

SCHEMAS = (
    "adi_spectrum",
    "divergence_comparison",
    "tradeoff",
    "watermark",
    "intrinsic_dim",
    "eval",
    "cross_grid",
    "features",
)
FORMATS = ("json", "csv", "svg")

# column headers kept even when a report has no rows
_EMPTY_COLUMNS = {"tradeoff": TRADEOFF_COLUMNS + ["gamma"]}


class Report(BaseModel):
    """Schema tag plus flat-ish rows; the unit every renderer consumes."""

    report_schema: str = Field(alias="schema")
    rows: List[Dict[str, Any]]
    meta: Dict[str, Any] = Field(default_factory=dict)

    model_config = {"populate_by_name": True}

    def to_json_obj(self) -> Dict[str, Any]:
        return {"schema": self.report_schema, "rows": self.rows, "meta": self.meta}


def _schema_of(item: Any) -> Optional[str]:
    if isinstance(item, DetectabilityScore):
        return "adi_spectrum"
    if isinstance(item, DivergenceComparison):
        return "divergence_comparison"
    if isinstance(item, TradeoffPoint):
        return "tradeoff"
    if isinstance(item, WatermarkReport):
        return "watermark"
    if isinstance(item, IntrinsicDimReport):
        return "intrinsic_dim"
    if isinstance(item, EvalReport):
        return "eval"
    if isinstance(item, GridCell):
        return "cross_grid"
    return None


def _row(item: Any) -> Dict[str, Any]:
    if isinstance(item, (EvalReport, GridCell)):
        return item.to_record()
    return item.model_dump()


def to_report(results: Any, schema: Optional[str] = None, meta: Optional[Mapping[str, Any]] = None) -> Report:
    """Wrap a module result (model, list of models, grouped spectra or DataFrame)."""
    meta = dict(meta or {})
    if isinstance(results, Report):
        return results
    if isinstance(results, Mapping) and "schema" in results and "rows" in results:
        if results["schema"] not in SCHEMAS:
            raise UnknownReportSchemaError(f"unrecognized report schema: {results['schema']!r}")
        return Report.model_validate(results)

    if isinstance(results, pd.DataFrame):
        schema = schema or "features"
        rows = results.to_dict(orient="records")
    elif isinstance(results, Mapping):
        # grouped spectra: {group: [DetectabilityScore, ...]}
        if not all(isinstance(v, (list, tuple)) for v in results.values()):
            raise UnknownReportSchemaError("mapping results must be {group: [items]} or carry 'schema' and 'rows'")
        rows, found = [], None
        for group, items in results.items():
            for item in items:
                found = found or _schema_of(item)
                rows.append({"group": group, **_row(item)})
        schema = schema or found
    else:
        items = list(results) if isinstance(results, (list, tuple)) else [results]
        if schema is None:
            kinds = {_schema_of(i) for i in items}
            schema = kinds.pop() if len(kinds) == 1 else None
        if schema == "tradeoff" and all(isinstance(i, TradeoffPoint) for i in items):
            rows = tradeoff_frame(items, with_gamma=True).to_dict(orient="records")
        else:
            rows = [_row(i) for i in items]

    if schema not in SCHEMAS:
        raise UnknownReportSchemaError(f"unrecognized report schema: {schema!r}")
    sentinel = get_config()["kl_report_sentinel"]
    return Report(schema=schema, rows=canonicalize(rows, sentinel=sentinel), meta=canonicalize(meta, sentinel=sentinel))


def load_report(path: Union[str, Path]) -> Report:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except ValueError as e:
        raise UnknownReportSchemaError(f"{path}: not a JSON report ({e})") from e
    if not isinstance(payload, dict):
        raise UnknownReportSchemaError(f"{path}: not a report object")
    if payload.get("schema") not in SCHEMAS:
        raise UnknownReportSchemaError(f"{path}: unrecognized report schema {payload.get('schema')!r}")
    try:
        return Report.model_validate(payload)
    except ValidationError as e:
        raise UnknownReportSchemaError(f"{path}: malformed report ({e.errors()[0]['msg']})") from e


def _flatten(row: Mapping[str, Any]) -> Dict[str, Any]:
    flat: Dict[str, Any] = {}
    for key, value in row.items():
        if isinstance(value, Mapping):
            flat.update(value)
        else:
            flat[key] = value
    return flat


def report_frame(report: Report) -> pd.DataFrame:
    if not report.rows:
        return pd.DataFrame(columns=_EMPTY_COLUMNS.get(report.report_schema, []))
    return pd.DataFrame([_flatten(r) for r in report.rows])


def render_csv(report: Report, float_format: str = "%.6f") -> str:
    frame = report_frame(report)
    return frame.to_csv(index=False, float_format=float_format, lineterminator="\n")


def render_report(
    results: Any,
    fmt: str,
    path: Optional[Union[str, Path]] = None,
    schema: Optional[str] = None,
    meta: Optional[Mapping[str, Any]] = None,
    float_format: str = "%.6f",
) -> str:
    """Render ``results`` as json, csv or svg; write to ``path`` when given and return the text."""
    if fmt not in FORMATS:
        raise ValueError(f"Unknown report format '{fmt}' (expected one of {FORMATS})")
    report = to_report(results, schema=schema, meta=meta)

    if fmt == "json":
        text = dumps_canonical(report.to_json_obj())
    elif fmt == "csv":
        text = render_csv(report, float_format)
    else:
        from agtd.reporting.plots import render_svg

        text = render_svg(report, render_csv(report, float_format))

    if path is not None:
        out = Path(path)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        logger.info("Wrote %s report (%d rows) to %s", report.report_schema, len(report.rows), out)
    return text


def render_all(results: Any, stem: Union[str, Path], formats: Sequence[str] = FORMATS, **kwargs) -> List[Path]:
    stem = Path(stem)
    written = []
    for fmt in formats:
        path = stem.with_suffix(f".{fmt}")
        render_report(results, fmt, path, **kwargs)
        written.append(path)
    return written
