import hashlib
import json
import math
import os
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Annotated, Any, Union

import pandas as pd

from agtd.numerics import KL_INFINITY_SENTINEL, MASK64, report_value, splitmix64

SavePathType = Annotated[Union[str, Path], "File path to save data. If None, data is not saved."]


def derive_seed(master: int, label: str) -> int:
    """Derive a subsystem seed: splitmix64(master XOR first 8 bytes of sha256(label))."""
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return splitmix64((int(master) & MASK64) ^ int.from_bytes(digest[:8], "big"))


def sha256_file(path: Union[str, Path]) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def canonicalize(obj: Any, digits: int = 6, sentinel: float = KL_INFINITY_SENTINEL) -> Any:
    """Round floats, replace infinities by the signed sentinel, recurse into containers."""
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, float):
        if math.isnan(obj):
            return None
        if math.isinf(obj):
            return report_value(obj, sentinel)
        return round(obj, digits) + 0.0  # folds -0.0 into 0.0
    if isinstance(obj, dict):
        return {str(k): canonicalize(v, digits, sentinel) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonicalize(v, digits, sentinel) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):  # numpy scalars
        return canonicalize(obj.item(), digits, sentinel)
    return obj


def dumps_canonical(obj: Any) -> str:
    return json.dumps(canonicalize(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def save_output(data: pd.DataFrame, save_path: SavePathType = None, float_format: str = "%.6f") -> None:
    if save_path:
        path = Path(save_path)
        os.makedirs(path.parent, exist_ok=True)
        data.to_csv(path, index=False, float_format=float_format, lineterminator="\n")
