"""Distortion versus detectability tables over perturbed watermarked streams."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple

import Levenshtein
import numpy as np
import pandas as pd
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict
from tqdm import tqdm

from agtd.dataflows.utils import derive_seed
from agtd.errors import StreamError
from agtd.watermark.distortion import bleu, edit_distance, semantic_similarity
from agtd.watermark.green_list import TokenStream, detect
from agtd.watermark.simulate import perturb, simulate_stream

logger = logging.getLogger(__name__)

Embedder = Callable[[TokenStream], ArrayLike]

TRADEOFF_COLUMNS = ["fraction", "stream_id", "edit_distance", "bleu", "semantic_sim", "z", "p"]


class TradeoffPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    fraction: float
    stream_id: int
    edit_distance: int
    bleu: float
    semantic_sim: Optional[float] = None
    z: float
    p_value: float
    gamma: float


def _score_cell(
    original: TokenStream,
    changed: TokenStream,
    fraction: float,
    stream_id: int,
    gamma: float,
    key: int,
    threshold: float,
    max_n: int,
    embedder: Optional[Embedder],
) -> TradeoffPoint:
    report = detect(changed, gamma, key, threshold=threshold)
    semantic = None
    if embedder is not None:
        semantic = semantic_similarity(embedder(original), embedder(changed))
    return TradeoffPoint(
        fraction=fraction,
        stream_id=stream_id,
        edit_distance=edit_distance(original.as_text(), changed.as_text()),
        bleu=bleu(changed.as_words(), original.as_words(), max_n=max_n),
        semantic_sim=semantic,
        z=report.z,
        p_value=report.p,
        gamma=gamma,
    )


def tradeoff_curve(
    originals: Sequence[TokenStream],
    fractions: Sequence[float],
    gamma: float,
    key: int,
    rng_seed: int,
    threshold: float = 0.01,
    max_n: int = 4,
    embedder: Optional[Embedder] = None,
    threads: int = 1,
    progress: bool = False,
) -> List[TradeoffPoint]:
    """Perturb every stream at every fraction, then detect and measure distortion.

    Each cell draws its substitutions from its own derived seed, so the table
    does not depend on evaluation order or thread count. Rows come back ordered
    by (stream index, fraction position).
    """
    cells: List[Tuple[int, int]] = [(i, j) for i in range(len(originals)) for j in range(len(fractions))]

    def _run(cell: Tuple[int, int]) -> TradeoffPoint:
        i, j = cell
        changed = perturb(originals[i], fractions[j], derive_seed(rng_seed, f"perturb:{i}:{j}"))
        return _score_cell(originals[i], changed, fractions[j], i, gamma, key, threshold, max_n, embedder)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = list(tqdm(pool.map(_run, cells), total=len(cells), desc="tradeoff", disable=not progress))
    else:
        points = [_run(c) for c in tqdm(cells, desc="tradeoff", disable=not progress)]
    logger.info("Scored %d tradeoff cells (%d streams x %d fractions)", len(points), len(originals), len(fractions))
    return points


def rewrite_tradeoff(
    originals: Sequence[TokenStream],
    rewritten: Sequence[TokenStream],
    gamma: float,
    key: int,
    threshold: float = 0.01,
    max_n: int = 4,
    embedder: Optional[Embedder] = None,
) -> List[TradeoffPoint]:
    """Tradeoff points for externally paraphrased streams, one per original.

    ``fraction`` is the token-level edit distance over the original length.
    """
    if len(originals) != len(rewritten):
        raise StreamError(f"{len(originals)} originals but {len(rewritten)} rewrites")
    points = []
    for i, (orig, new) in enumerate(zip(originals, rewritten)):
        if new.vocab_size != orig.vocab_size:
            raise StreamError(f"stream {i}: rewrite vocabulary {new.vocab_size} != {orig.vocab_size}")
        fraction = Levenshtein.distance(orig.tokens, new.tokens) / max(1, len(orig.tokens))
        points.append(_score_cell(orig, new, fraction, i, gamma, key, threshold, max_n, embedder))
    return points


def gamma_sweep(
    gammas: Sequence[float],
    n_streams: int,
    vocab_size: int,
    length: int,
    delta: float,
    key: int,
    fractions: Sequence[float],
    rng_seed: int,
    threshold: float = 0.01,
    max_n: int = 4,
    threads: int = 1,
    progress: bool = False,
) -> List[TradeoffPoint]:
    """Tradeoff points for fresh streams at each green-list fraction."""
    points: List[TradeoffPoint] = []
    for gamma in gammas:
        streams = [
            simulate_stream(vocab_size, length, gamma, delta, key, derive_seed(rng_seed, f"stream:{gamma}:{i}"))
            for i in range(n_streams)
        ]
        points.extend(
            tradeoff_curve(
                streams,
                fractions,
                gamma,
                key,
                derive_seed(rng_seed, f"sweep:{gamma}"),
                threshold=threshold,
                max_n=max_n,
                threads=threads,
                progress=progress,
            )
        )
    return points


def tradeoff_frame(points: Sequence[TradeoffPoint], with_gamma: bool = False) -> pd.DataFrame:
    """Tabular form with the fixed tradeoff CSV header."""
    rows = [
        {
            "fraction": p.fraction,
            "stream_id": p.stream_id,
            "edit_distance": p.edit_distance,
            "bleu": p.bleu,
            "semantic_sim": np.nan if p.semantic_sim is None else p.semantic_sim,
            "z": p.z,
            "p": p.p_value,
            "gamma": p.gamma,
        }
        for p in points
    ]
    columns = TRADEOFF_COLUMNS + (["gamma"] if with_gamma else [])
    return pd.DataFrame(rows, columns=TRADEOFF_COLUMNS + ["gamma"])[columns]


def median_p_by_fraction(points: Sequence[TradeoffPoint]) -> pd.Series:
    frame = tradeoff_frame(points)
    return frame.groupby("fraction", sort=True)["p"].median()
