from .context import ContextDistribution, pair_divergence, word_context_distributions
from .spectrum import (
    Band,
    CorpusDivergence,
    DetectabilityScore,
    DivergenceComparison,
    adi_spectrum,
    band_for,
    compare_divergences,
    corpus_adi,
    group_pairs,
    grouped_adi_spectrum,
)

__all__ = [
    "Band",
    "ContextDistribution",
    "CorpusDivergence",
    "DetectabilityScore",
    "DivergenceComparison",
    "adi_spectrum",
    "band_for",
    "compare_divergences",
    "corpus_adi",
    "group_pairs",
    "grouped_adi_spectrum",
    "pair_divergence",
    "word_context_distributions",
]
