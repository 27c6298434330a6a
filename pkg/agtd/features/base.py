import math
from typing import Dict, Tuple

from pydantic import BaseModel, ConfigDict, model_validator


class FeatureVector(BaseModel):
    model_config = ConfigDict(frozen=True)

    doc_id: str
    names: Tuple[str, ...]
    values: Tuple[float, ...]

    @model_validator(mode="after")
    def _aligned_and_finite(self) -> "FeatureVector":
        if len(self.names) != len(self.values):
            raise ValueError(f"{len(self.names)} feature names but {len(self.values)} values")
        for name, value in zip(self.names, self.values):
            if not math.isfinite(value):
                raise ValueError(f"feature '{name}' of '{self.doc_id}' is not finite")
        return self

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(self.names, self.values))
