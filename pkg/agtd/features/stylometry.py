"""Journalistic style features: sentence and lead length, punctuation habits and number formatting."""

import math

import regex as re

from agtd.dataflows.corpus import Document, split_sentences, tokenize
from agtd.features.base import FeatureVector

STYLO_FEATURE_NAMES = (
    "mean_words_per_sentence",
    "lead_paragraph_words",
    "total_words",
    "punctuation_density",
    "danda_density",
    "comma_density",
    "digit_run_count",
    "date_time_pattern_fraction",
)

_PARAGRAPH_BREAK_RE = re.compile(r"\n[ \t]*\n")
_PUNCT_RE = re.compile(r"\p{P}")
_DANDA_RE = re.compile(r"[।॥]")
# digit groups joined by date/time/number separators count as one run
_DIGIT_RUN_RE = re.compile(r"\d+(?:[/:.\-]\d+)*")
_DATE_TIME_RE = re.compile(r"\d{1,2}/\d{1,2}/\d{4}|\d{1,2}:\d{2}(?::\d{2})?")


def _lead_paragraph(text: str) -> str:
    parts = _PARAGRAPH_BREAK_RE.split(text, maxsplit=1)
    if len(parts) > 1:
        return parts[0]
    sentences = split_sentences(text)
    return sentences[0] if sentences else ""


def stylometric_features(doc: Document) -> FeatureVector:
    text = doc.text
    n_chars = len(text)
    sentences = split_sentences(text)
    total_words = len(tokenize(text))
    sentence_words = [len(tokenize(s)) for s in sentences]
    mean_words = math.fsum(sentence_words) / len(sentences) if sentences else 0.0

    runs = _DIGIT_RUN_RE.findall(text)
    date_like = sum(1 for r in runs if _DATE_TIME_RE.fullmatch(r))

    def density(pattern: re.Pattern) -> float:
        return len(pattern.findall(text)) / n_chars if n_chars else 0.0

    values = (
        mean_words,
        float(len(tokenize(_lead_paragraph(text)))),
        float(total_words),
        density(_PUNCT_RE),
        density(_DANDA_RE),
        text.count(",") / n_chars if n_chars else 0.0,
        float(len(runs)),
        date_like / len(runs) if runs else 0.0,
    )
    return FeatureVector(doc_id=doc.id, names=STYLO_FEATURE_NAMES, values=values)
