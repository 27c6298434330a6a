import logging
import math

import numpy as np

from agtd.errors import StreamError
from agtd.watermark.green_list import TokenStream, _check_gamma, green_row

logger = logging.getLogger(__name__)


def simulate_stream(
    vocab_size: int,
    length: int,
    gamma: float,
    delta: float,
    key: int,
    rng_seed: int,
) -> TokenStream:
    """Sample a stream whose green tokens get their mass multiplied by exp(delta).

    The first token is uniform; every later token is drawn from the softly
    biased distribution keyed on its predecessor. delta=0 is plain uniform
    sampling.
    """
    if vocab_size < 2:
        raise StreamError(f"vocab_size must be >= 2, got {vocab_size}")
    if length < 2:
        raise StreamError(f"length must be >= 2, got {length}")
    if delta < 0:
        raise StreamError(f"delta must be >= 0, got {delta}")
    _check_gamma(gamma)

    rng = np.random.default_rng(rng_seed)
    boost = math.exp(delta)
    draws = rng.random(length)
    tokens = [int(min(vocab_size - 1, math.floor(draws[0] * vocab_size)))]
    for u in draws[1:]:
        weights = np.where(green_row(tokens[-1], vocab_size, gamma, key), boost, 1.0)
        cdf = np.cumsum(weights)
        tok = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
        tokens.append(min(tok, vocab_size - 1))
    return TokenStream(tokens=tokens, vocab_size=vocab_size)


def perturb(stream: TokenStream, fraction: float, rng_seed: int) -> TokenStream:
    """Substitute floor(fraction * len + 0.5) distinct positions with different random ids.

    Halves round up, unlike Python's banker's ``round``: 0.5 of a 5-token
    stream changes 3 positions.
    """
    if not 0.0 <= fraction <= 1.0:
        raise StreamError(f"fraction must lie in [0, 1], got {fraction}")
    n = len(stream.tokens)
    count = int(math.floor(fraction * n + 0.5))
    if count == 0:
        return stream

    rng = np.random.default_rng(rng_seed)
    positions = rng.choice(n, size=count, replace=False)
    tokens = np.asarray(stream.tokens, dtype=np.int64)
    # draw from V-1 ids and skip over the original so every position changes
    repl = rng.integers(0, stream.vocab_size - 1, size=count)
    repl = repl + (repl >= tokens[positions])
    tokens[positions] = repl
    return TokenStream(tokens=tokens.tolist(), vocab_size=stream.vocab_size)
