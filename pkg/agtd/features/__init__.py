import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Sequence

import pandas as pd
from tqdm import tqdm

from agtd.dataflows.corpus import Document
from agtd.errors import FeatureError

from .base import FeatureVector
from .raidar import RAIDAR_FEATURE_NAMES, REWRITE_PROMPTS, raidar_features, rewrite_features
from .stylometry import STYLO_FEATURE_NAMES, stylometric_features

logger = logging.getLogger(__name__)

FEATURE_EXTRACTORS: Dict[str, Callable[[Document], FeatureVector]] = {
    "raidar": raidar_features,
    "stylo": stylometric_features,
}


def feature_matrix(
    documents: Sequence[Document],
    extractor: str = "stylo",
    threads: int = 1,
    progress: bool = False,
) -> pd.DataFrame:
    """doc_id, label, then one column per feature; rows keep document order."""
    if extractor not in FEATURE_EXTRACTORS:
        raise FeatureError(f"Unknown feature extractor '{extractor}' (expected one of {sorted(FEATURE_EXTRACTORS)})")
    fn = FEATURE_EXTRACTORS[extractor]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            vectors = list(tqdm(pool.map(fn, documents), total=len(documents), desc=extractor, disable=not progress))
    else:
        vectors = [fn(d) for d in tqdm(documents, desc=extractor, disable=not progress)]

    names = list(vectors[0].names) if vectors else list(
        RAIDAR_FEATURE_NAMES if extractor == "raidar" else STYLO_FEATURE_NAMES
    )
    rows = [
        {"doc_id": doc.id, "label": doc.label.value, **vec.as_dict()}
        for doc, vec in zip(documents, vectors)
    ]
    logger.info("Extracted %d %s feature vectors", len(rows), extractor)
    return pd.DataFrame(rows, columns=["doc_id", "label", *names])


__all__ = [
    "FEATURE_EXTRACTORS",
    "FeatureVector",
    "RAIDAR_FEATURE_NAMES",
    "REWRITE_PROMPTS",
    "STYLO_FEATURE_NAMES",
    "feature_matrix",
    "raidar_features",
    "rewrite_features",
    "stylometric_features",
]
