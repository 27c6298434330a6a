"""Previous-token seeded green lists and the z-score detector."""

import json
import logging
import math
from functools import lru_cache
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from agtd.errors import StreamError
from agtd.numerics import GOLDEN_GAMMA, MASK64, normal_upper_tail, splitmix64, splitmix64_array

logger = logging.getLogger(__name__)

_MANTISSA_MASK = (1 << 53) - 1
_TWO_53 = float(1 << 53)

# Largest vocabulary whose full prev x token green matrix is cached.
MAX_CACHED_VOCAB = 4096


class TokenStream(BaseModel):
    model_config = ConfigDict(frozen=True)

    tokens: List[int]
    vocab_size: int = Field(ge=2)

    @model_validator(mode="after")
    def _ids_in_vocab(self) -> "TokenStream":
        for i, tok in enumerate(self.tokens):
            if tok < 0 or tok >= self.vocab_size:
                raise ValueError(f"token {tok} at position {i} outside vocabulary of size {self.vocab_size}")
        return self

    def __len__(self) -> int:
        return len(self.tokens)

    def as_text(self) -> str:
        """Space-joined ids, the string form used for lexical distortion."""
        return " ".join(str(t) for t in self.tokens)

    def as_words(self) -> List[str]:
        return [str(t) for t in self.tokens]

    def to_json(self) -> str:
        return json.dumps({"vocab_size": self.vocab_size, "tokens": self.tokens})

    @classmethod
    def from_record(cls, record, where: str = "") -> "TokenStream":
        try:
            return cls.model_validate(record)
        except ValueError as e:
            raise StreamError(f"invalid token stream{where}: {e}") from e

    @classmethod
    def from_json(cls, raw: str, where: str = "") -> "TokenStream":
        try:
            record = json.loads(raw)
        except json.JSONDecodeError as e:
            raise StreamError(f"invalid token stream{where}: {e.msg}") from e
        return cls.from_record(record, where)


class WatermarkReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    t: int = Field(ge=1)
    green_count: int = Field(ge=0)
    gamma: float = Field(gt=0.0, lt=1.0)
    z: float
    p: float
    detected: bool
    threshold: float = 0.01

    @model_validator(mode="after")
    def _count_bounded(self) -> "WatermarkReport":
        if self.green_count > self.t:
            raise ValueError(f"green_count {self.green_count} exceeds t {self.t}")
        return self


def _check_gamma(gamma: float) -> None:
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")


def prefix_seed(prev_token: int, key: int) -> int:
    return splitmix64((int(key) & MASK64) ^ ((int(prev_token) * GOLDEN_GAMMA) & MASK64))


def is_green(prev_token: int, token: int, gamma: float, key: int) -> bool:
    """Whether ``token`` is on the green list seeded by ``prev_token`` and ``key``."""
    seed64 = prefix_seed(prev_token, key)
    u = (splitmix64(seed64 ^ int(token)) & _MANTISSA_MASK) / _TWO_53
    return u < gamma


def green_mask(prev_tokens, tokens, gamma: float, key: int) -> np.ndarray:
    """Vectorized ``is_green`` over broadcastable arrays of prev/next ids."""
    prev = np.asarray(prev_tokens, dtype=np.uint64)
    tok = np.asarray(tokens, dtype=np.uint64)
    with np.errstate(over="ignore"):
        seed64 = splitmix64_array(np.uint64(int(key) & MASK64) ^ (prev * np.uint64(GOLDEN_GAMMA)))
    bits = splitmix64_array(seed64 ^ tok) & np.uint64(_MANTISSA_MASK)
    return bits.astype(np.float64) / _TWO_53 < gamma


def green_list(prev_token: int, vocab_size: int, gamma: float, key: int) -> np.ndarray:
    """Sorted green token ids for one prefix."""
    _check_gamma(gamma)
    mask = green_mask(prev_token, np.arange(vocab_size), gamma, key)
    return np.flatnonzero(mask)


@lru_cache(maxsize=16)
def green_matrix(vocab_size: int, gamma: float, key: int) -> np.ndarray:
    """Read-only V x V boolean matrix, row = previous token, column = token."""
    ids = np.arange(vocab_size, dtype=np.uint64)
    matrix = green_mask(ids[:, None], ids[None, :], gamma, key)
    matrix.setflags(write=False)
    return matrix


def green_row(prev_token: int, vocab_size: int, gamma: float, key: int) -> np.ndarray:
    if vocab_size <= MAX_CACHED_VOCAB:
        return green_matrix(vocab_size, float(gamma), int(key))[prev_token]
    return green_mask(prev_token, np.arange(vocab_size), gamma, key)


def z_score(green_count: int, t: int, gamma: float) -> float:
    return (green_count - gamma * t) / math.sqrt(t * gamma * (1.0 - gamma))


def detect(
    stream: TokenStream,
    gamma: float,
    key: int,
    threshold: float = 0.01,
    ignore_repeated_bigrams: bool = False,
) -> WatermarkReport:
    """Score a stream from its second token on; p is the one-sided normal tail of z.

    With ``ignore_repeated_bigrams`` every distinct (prev, token) bigram counts
    once, so ``t`` becomes the number of unique bigrams.
    """
    _check_gamma(gamma)
    if len(stream.tokens) < 2:
        raise StreamError(f"stream needs at least 2 tokens to score, got {len(stream.tokens)}")

    tokens = np.asarray(stream.tokens, dtype=np.int64)
    prev, nxt = tokens[:-1], tokens[1:]
    if ignore_repeated_bigrams:
        bigrams = np.unique(np.stack([prev, nxt], axis=1), axis=0)
        prev, nxt = bigrams[:, 0], bigrams[:, 1]

    t = int(prev.shape[0])
    green_count = int(np.count_nonzero(green_mask(prev, nxt, gamma, key)))
    z = z_score(green_count, t, gamma)
    p = normal_upper_tail(z)
    logger.debug("detect: t=%d green=%d z=%.4f p=%.3g", t, green_count, z, p)
    return WatermarkReport(
        t=t,
        green_count=green_count,
        gamma=gamma,
        z=z,
        p=p,
        detected=p < threshold,
        threshold=threshold,
    )


def load_streams(path: str) -> List[TokenStream]:
    """Read one stream per line, or a single JSON stream / JSON list of streams."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = f.read()
    except UnicodeDecodeError as e:
        raise StreamError(f"{path}: not valid UTF-8 at byte {e.start}") from e
    stripped = raw.strip()
    if not stripped:
        return []
    if stripped.startswith("["):
        try:
            items = json.loads(stripped)
        except json.JSONDecodeError as e:
            raise StreamError(f"invalid stream list: {e.msg}") from e
        return [TokenStream.from_record(item, f" (item {i})") for i, item in enumerate(items)]
    return [
        TokenStream.from_json(line, f" (line {n})")
        for n, line in enumerate(stripped.splitlines(), start=1)
        if line.strip()
    ]


def dump_streams(streams: List[TokenStream], path: Optional[str] = None) -> str:
    text = "".join(s.to_json() + "\n" for s in streams)
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    return text
