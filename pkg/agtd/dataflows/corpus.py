"""JSON-lines corpus ingestion, Unicode tokenization and human/AI pairing.

Tokens are maximal runs of letter, digit and combining-mark code points, so
Devanagari vowel signs and viramas stay inside their word. ASCII letters are
lowercased; everything else is kept verbatim.
"""

import io
import json
import logging
import string
from enum import Enum
from pathlib import Path
from typing import IO, Any, Dict, Iterable, List, Optional, Tuple, Union

import regex as re
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from agtd.errors import CorpusFormatError, PairingError

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"[\p{L}\p{N}\p{M}]+")
# danda, double danda and Latin terminators, only when followed by whitespace or end
_SENTENCE_END_RE = re.compile(r"[।॥.?!]+(?=\s|\Z)")
_ASCII_LOWER = str.maketrans(string.ascii_uppercase, string.ascii_lowercase)

REQUIRED_KEYS = ("id", "source", "label", "headline", "text")


class Label(str, Enum):
    HUMAN = "human"
    AI = "ai"


def tokenize(text: str) -> List[str]:
    """Split text into word tokens; punctuation and whitespace are dropped."""
    return [tok.translate(_ASCII_LOWER) for tok in _TOKEN_RE.findall(text)]


def split_sentences(text: str) -> List[str]:
    """Split on danda, double danda, '.', '?' and '!' followed by whitespace or end."""
    parts = _SENTENCE_END_RE.split(text)
    return [p.strip() for p in parts if p.strip()]


def sentence_tokens(text: str) -> List[List[str]]:
    return [tokenize(s) for s in split_sentences(text)]


class Document(BaseModel):
    """One labeled article. ``sentences`` is always recomputed from ``text``."""

    model_config = ConfigDict(frozen=True, use_enum_values=False)

    id: str = Field(min_length=1)
    source: str
    label: Label
    model: Optional[str] = None
    headline: str
    text: str
    sentences: List[List[str]] = Field(default_factory=list, exclude=True, repr=False)

    @model_validator(mode="before")
    @classmethod
    def _derive_sentences(cls, data: Any) -> Any:
        if isinstance(data, dict) and "text" in data:
            data = dict(data)
            data["sentences"] = sentence_tokens(str(data["text"]))
        return data

    @model_validator(mode="after")
    def _ai_needs_model(self) -> "Document":
        if self.label == Label.AI and not self.model:
            raise ValueError("label 'ai' requires a 'model'")
        return self

    @property
    def tokens(self) -> List[str]:
        return [tok for sent in self.sentences for tok in sent]

    @property
    def vocabulary(self) -> frozenset:
        return frozenset(self.tokens)

    def to_record(self) -> Dict[str, Any]:
        record = self.model_dump(mode="json", exclude={"sentences"})
        if record.get("model") is None:
            record.pop("model", None)
        return record


class ParallelPair(BaseModel):
    model_config = ConfigDict(frozen=True)

    human: Document
    ai: Document
    pair_key: str

    @model_validator(mode="after")
    def _check_roles(self) -> "ParallelPair":
        if self.human.label != Label.HUMAN:
            raise ValueError(f"pair '{self.pair_key}': human side has label {self.human.label.value}")
        if self.ai.label != Label.AI:
            raise ValueError(f"pair '{self.pair_key}': ai side has label {self.ai.label.value}")
        return self

    @property
    def model(self) -> str:
        return self.ai.model or ""

    @property
    def source(self) -> str:
        return self.human.source


class PairingResult(BaseModel):
    pairs: List[ParallelPair]
    unmatched_human: List[Document] = Field(default_factory=list)
    unmatched_ai: List[Document] = Field(default_factory=list)

    @property
    def n_unmatched(self) -> int:
        return len(self.unmatched_human) + len(self.unmatched_ai)


def _iter_lines(stream: Union[IO[bytes], IO[str], bytes, str]) -> Iterable[Union[bytes, str]]:
    if isinstance(stream, bytes):
        stream = io.BytesIO(stream)
    elif isinstance(stream, str):
        stream = io.StringIO(stream)
    yield from stream


def parse_corpus(stream: Union[IO[bytes], IO[str], bytes, str]) -> List[Document]:
    """Parse a JSON-lines corpus into documents, preserving file order."""
    documents: List[Document] = []
    seen_ids = set()
    for line_number, raw in enumerate(_iter_lines(stream), start=1):
        try:
            line = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        except UnicodeDecodeError as e:
            raise CorpusFormatError(f"not valid UTF-8 at byte {e.start}", line_number=line_number) from e
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise CorpusFormatError(f"malformed JSON ({e.msg})", line_number=line_number) from e
        if not isinstance(record, dict):
            raise CorpusFormatError("expected a JSON object", line_number=line_number)
        for key in REQUIRED_KEYS:
            if key not in record:
                raise CorpusFormatError(f"missing required key '{key}'", line_number=line_number, key=key)
        if record["label"] == Label.AI.value and not record.get("model"):
            raise CorpusFormatError("missing required key 'model' for label 'ai'", line_number=line_number, key="model")
        try:
            doc = Document.model_validate(record)
        except ValidationError as e:
            raise CorpusFormatError(f"invalid document: {e.errors()[0]['msg']}", line_number=line_number) from e
        if doc.id in seen_ids:
            raise CorpusFormatError(f"duplicate id '{doc.id}'", line_number=line_number, key="id")
        seen_ids.add(doc.id)
        documents.append(doc)
    logger.debug("Parsed %d documents", len(documents))
    return documents


def load_corpus(path: Union[str, Path]) -> List[Document]:
    with open(path, "rb") as f:
        return parse_corpus(f)


def dump_corpus(documents: Iterable[Document], stream: IO[str]) -> None:
    for doc in documents:
        stream.write(json.dumps(doc.to_record(), ensure_ascii=False, sort_keys=True) + "\n")


def split_by_label(documents: Iterable[Document]) -> Tuple[List[Document], List[Document]]:
    humans = [d for d in documents if d.label == Label.HUMAN]
    ais = [d for d in documents if d.label == Label.AI]
    return humans, ais


def pair_documents(humans: List[Document], ais: List[Document]) -> PairingResult:
    """Pair AI documents with the human article sharing their exact headline."""
    by_headline: Dict[str, Document] = {}
    for doc in humans:
        if doc.headline in by_headline:
            raise PairingError(
                f"headline shared by human documents '{by_headline[doc.headline].id}' and '{doc.id}'"
            )
        by_headline[doc.headline] = doc

    pairs: List[ParallelPair] = []
    unmatched_ai: List[Document] = []
    used = set()
    for doc in ais:
        human = by_headline.get(doc.headline)
        if human is None:
            unmatched_ai.append(doc)
            continue
        pairs.append(ParallelPair(human=human, ai=doc, pair_key=doc.headline))
        used.add(human.id)

    unmatched_human = [d for d in humans if d.id not in used]
    if unmatched_human or unmatched_ai:
        logger.warning(
            "Pairing left %d human and %d ai documents unmatched",
            len(unmatched_human),
            len(unmatched_ai),
        )
    return PairingResult(pairs=pairs, unmatched_human=unmatched_human, unmatched_ai=unmatched_ai)
