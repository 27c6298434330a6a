import json
import logging
import math
from pathlib import Path
from typing import List, Union

import numpy as np

from agtd.errors import PointCloudFormatError
from agtd.geometry.intrinsic_dim import PointCloud

logger = logging.getLogger(__name__)


def _parse_float(token: str, row: int) -> float:
    try:
        value = float(token)
    except ValueError as e:
        raise PointCloudFormatError(f"not a decimal number: '{token}'", row=row) from e
    if not math.isfinite(value):
        raise PointCloudFormatError(f"non-finite value '{token}'", row=row)
    return value


def _parse_text(text: str) -> np.ndarray:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise PointCloudFormatError("empty point-cloud file")
    header = lines[0].split()
    if len(header) != 2:
        raise PointCloudFormatError(f"header must be 'n d', got '{lines[0].strip()}'")
    try:
        n, d = int(header[0]), int(header[1])
    except ValueError as e:
        raise PointCloudFormatError(f"header must hold two integers, got '{lines[0].strip()}'") from e
    rows = lines[1:]
    if len(rows) != n:
        raise PointCloudFormatError(f"header declares {n} rows but {len(rows)} follow")

    points: List[List[float]] = []
    for i, line in enumerate(rows, start=1):
        fields = line.split()
        if len(fields) != d:
            raise PointCloudFormatError(f"expected {d} values, got {len(fields)}", row=i)
        points.append([_parse_float(tok, i) for tok in fields])
    return np.asarray(points, dtype=np.float64).reshape(n, d)


def _parse_json(text: str) -> np.ndarray:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise PointCloudFormatError(f"malformed JSON ({e.msg})") from e
    if not isinstance(payload, dict) or not isinstance(payload.get("points"), list):
        raise PointCloudFormatError("JSON point cloud must be an object with a 'points' list")
    rows = payload["points"]
    if not rows:
        raise PointCloudFormatError("no points")
    d = len(rows[0]) if isinstance(rows[0], list) else -1
    points = []
    for i, row in enumerate(rows, start=1):
        if not isinstance(row, list) or len(row) != d:
            raise PointCloudFormatError(f"expected {d} values", row=i)
        points.append([_parse_float(str(v), i) for v in row])
    return np.asarray(points, dtype=np.float64)


def load_point_cloud(path: Union[str, Path]) -> PointCloud:
    """Read an "n d" text file or a JSON {"points": [[...]]} file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise PointCloudFormatError(f"{path}: not valid UTF-8 at byte {e.start}") from e
    points = _parse_json(text) if text.lstrip().startswith("{") else _parse_text(text)
    logger.debug("Loaded %d x %d point cloud from %s", points.shape[0], points.shape[1], path)
    return PointCloud(points)
