"""Lexical, syntactic and semantic distortion between an original and a rewrite."""

import math
from typing import Sequence

import Levenshtein
import numpy as np
from nltk.translate.bleu_score import SmoothingFunction, sentence_bleu
from numpy.typing import ArrayLike

from agtd.errors import EmbeddingError

BLEU_EPSILON = 1e-9
_SMOOTHING = SmoothingFunction(epsilon=BLEU_EPSILON).method1


def edit_distance(a: str, b: str) -> int:
    """Character-level Levenshtein distance over code points."""
    return Levenshtein.distance(a, b)


def bleu(candidate: Sequence[str], reference: Sequence[str], max_n: int = 4) -> float:
    """Sentence BLEU with uniform weights.

    n is capped at the candidate length; a zero clipped count adds 1e-9 to the
    numerator instead of sending the log to minus infinity.
    """
    if max_n < 1:
        raise ValueError(f"max_n must be >= 1, got {max_n}")
    if not candidate:
        return 0.0

    top = min(max_n, len(candidate))
    score = sentence_bleu(
        [list(reference)],
        list(candidate),
        weights=(1.0 / top,) * top,
        smoothing_function=_SMOOTHING,
    )
    return min(max(float(score), 0.0), 1.0)


def _unit_rows(emb: ArrayLike, name: str) -> np.ndarray:
    m = np.asarray(emb, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] == 0:
        raise EmbeddingError(f"{name} must be a non-empty list of vectors")
    norms = np.linalg.norm(m, axis=1)
    if np.any(norms == 0):
        raise EmbeddingError(f"{name} contains a zero vector at index {int(np.flatnonzero(norms == 0)[0])}")
    return m / norms[:, None]


def semantic_similarity(emb_a: ArrayLike, emb_b: ArrayLike) -> float:
    """Greedy cosine-matching F1 between two lists of per-token embeddings.

    Precision and recall of opposite sign (or a zero product) give 0.0; the
    result always lies in [-1, 1].
    """
    a = _unit_rows(emb_a, "emb_a")
    b = _unit_rows(emb_b, "emb_b")
    if a.shape[1] != b.shape[1]:
        raise EmbeddingError(f"embedding dimension mismatch: {a.shape[1]} != {b.shape[1]}")
    sim = a @ b.T
    recall = math.fsum(sim.max(axis=1)) / a.shape[0]
    precision = math.fsum(sim.max(axis=0)) / b.shape[0]
    if precision * recall <= 0.0:
        return 0.0
    f1 = 2.0 * precision * recall / (precision + recall)
    return min(max(f1, -1.0), 1.0)
