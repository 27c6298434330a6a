from enum import Enum
from typing import Dict, Optional

from pydantic import BaseModel, Field


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"
    SVG = "svg"


class FeatureKind(str, Enum):
    RAIDAR = "raidar"
    STYLO = "stylo"


class Measure(str, Enum):
    JSD = "jsd"
    KL = "kl"


class FitScope(str, Enum):
    JOINT = "joint"
    PER_SOURCE = "per_source"


class RunManifest(BaseModel):
    """Everything needed to reproduce one CLI run."""

    command: str
    config: Dict[str, object]
    input_hashes: Dict[str, str] = Field(default_factory=dict)
    outputs: Dict[str, str] = Field(default_factory=dict)
    seed: int
    tool_version: str
    started: str
    finished: Optional[str] = None
