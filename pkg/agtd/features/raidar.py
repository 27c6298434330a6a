"""Rewrite-distance features: how much a rewriting model changes a text.

Machine text tends to come back from a rewrite nearly untouched, so small
normalized edit distances point to AI authorship.
"""

import logging
from typing import Sequence

from agtd.dataflows.corpus import Document
from agtd.dataflows.interface import route_to_vendor
from agtd.errors import FeatureError
from agtd.features.base import FeatureVector
from agtd.watermark.distortion import edit_distance

logger = logging.getLogger(__name__)

REWRITE_PROMPTS = (
    "Concise this for me in Hindi only and keep all the information.",
    "Help me polish this in Hindi only.",
    "Make this fluent in Hindi only while making minimal changes.",
    "Refine the following paragraph for me in Hindi only.",
    "Revise this in Hindi only with your best efforts.",
    "Rewrite this in Hindi only.",
)

RAIDAR_FEATURE_NAMES = tuple(f"raidar_p{i}" for i in range(1, len(REWRITE_PROMPTS) + 1))


def rewrite_features(original: Document, rewrites: Sequence[str]) -> FeatureVector:
    """Edit distance of each rewrite to the original, over the original's length in characters."""
    if len(rewrites) != len(REWRITE_PROMPTS):
        raise FeatureError(
            f"document '{original.id}': expected {len(REWRITE_PROMPTS)} rewrites, got {len(rewrites)}"
        )
    length = max(1, len(original.text))
    values = tuple(edit_distance(original.text, r) / length for r in rewrites)
    return FeatureVector(doc_id=original.id, names=RAIDAR_FEATURE_NAMES, values=values)


def raidar_features(doc: Document) -> FeatureVector:
    rewrites = route_to_vendor("get_rewrites", doc, REWRITE_PROMPTS)
    return rewrite_features(doc, rewrites)
