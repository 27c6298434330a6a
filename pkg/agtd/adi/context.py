"""Per-word context distributions and the per-pair mean divergence."""

import logging
import math
from collections import Counter, defaultdict
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from agtd.dataflows.corpus import Document, ParallelPair
from agtd.errors import ContextError
from agtd.numerics import js_divergence, kl_divergence

logger = logging.getLogger(__name__)

MEASURES = ("jsd", "kl")


class ContextDistribution(BaseModel):
    """Co-occurrence counts over the combined context vocabulary of one word."""

    model_config = ConfigDict(frozen=True)

    support: Tuple[str, ...]
    counts: Tuple[int, ...]

    @model_validator(mode="after")
    def _aligned(self) -> "ContextDistribution":
        if len(set(self.support)) != len(self.support):
            raise ValueError("support contains duplicate words")
        if len(self.counts) != len(self.support):
            raise ValueError("counts do not align with support")
        return self

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def distribution(self) -> np.ndarray:
        counts = np.asarray(self.counts, dtype=np.float64)
        total = self.total
        return counts / total if total > 0 else counts


class _SentenceIndex:
    """Sentence-level token counts plus word -> sentence positions for one document."""

    def __init__(self, doc: Document):
        self.counts: List[Counter] = [Counter(sent) for sent in doc.sentences]
        self.order: List[List[str]] = [list(dict.fromkeys(sent)) for sent in doc.sentences]
        self.where: Dict[str, List[int]] = defaultdict(list)
        for i, counter in enumerate(self.counts):
            for word in counter:
                self.where[word].append(i)

    def context(self, word: str) -> Tuple[Counter, List[str]]:
        total: Counter = Counter()
        order: List[str] = []
        for i in self.where.get(word, ()):
            total.update(self.counts[i])
            order.extend(self.order[i])
        return total, order


def _distributions(word: str, human: _SentenceIndex, ai: _SentenceIndex) -> Tuple[ContextDistribution, ContextDistribution]:
    if word not in human.where or word not in ai.where:
        side = "human" if word not in human.where else "ai"
        raise ContextError(f"word '{word}' does not occur in the {side} document")
    c_h, order_h = human.context(word)
    c_ai, order_ai = ai.context(word)
    # V_comb in first-appearance order, human side first
    support = tuple(dict.fromkeys(order_h + order_ai))
    p_h = ContextDistribution(support=support, counts=tuple(c_h[w] for w in support))
    p_ai = ContextDistribution(support=support, counts=tuple(c_ai[w] for w in support))
    return p_h, p_ai


def word_context_distributions(pair: ParallelPair, word: str) -> Tuple[ContextDistribution, ContextDistribution]:
    """Context distributions of ``word`` in the human and AI document of a pair.

    Both share the same ordered support (the union of the words of every
    sentence containing ``word`` on either side); the word itself is counted.
    """
    return _distributions(word, _SentenceIndex(pair.human), _SentenceIndex(pair.ai))


def pair_divergence(
    pair: ParallelPair,
    measure: str = "jsd",
    base: float = 2.0,
) -> Optional[float]:
    """Mean divergence over the shared vocabulary of a pair.

    Returns ``None`` (skip marker) when the two documents share no word. With
    ``measure="kl"`` the result is ``math.inf`` as soon as one word has a
    context word the AI side never uses.
    """
    if measure not in MEASURES:
        raise ValueError(f"Unknown divergence measure '{measure}' (expected one of {MEASURES})")
    human = _SentenceIndex(pair.human)
    ai = _SentenceIndex(pair.ai)
    shared = sorted(pair.human.vocabulary & pair.ai.vocabulary)
    if not shared:
        logger.debug("pair '%s' skipped: empty shared vocabulary", pair.pair_key)
        return None

    divergence = js_divergence if measure == "jsd" else kl_divergence
    per_word = []
    for word in shared:
        p_h, p_ai = _distributions(word, human, ai)
        per_word.append(divergence(p_h.distribution, p_ai.distribution, base=base))
    if any(math.isinf(v) for v in per_word):
        return math.inf
    return math.fsum(per_word) / len(shared)
