"""Corpus-level divergence per model and the 0-100 detectability spectrum."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from tqdm import tqdm

from agtd.adi.context import pair_divergence
from agtd.dataflows.corpus import ParallelPair
from agtd.errors import AllPairsSkippedError, SpectrumError
from agtd.numerics import min_max_scale, yeo_johnson

logger = logging.getLogger(__name__)

DEFAULT_BAND_THRESHOLDS = (33.3, 66.6)


class Band(str, Enum):
    EASY_TO_DETECT = "easy_to_detect"
    DETECTABLE = "detectable"
    DIFFICULT_TO_DETECT = "difficult_to_detect"


class CorpusDivergence(BaseModel):
    """Mean pair divergence of one model's outputs against their human pairs."""

    model_config = ConfigDict(frozen=True)

    model: str
    raw_mean: float
    pairs_used: int
    pairs_skipped: int
    measure: str = "jsd"


class DetectabilityScore(BaseModel):
    model_config = ConfigDict(frozen=True)

    model: str
    raw_mean_jsd: float
    transformed: float
    adi: float = Field(ge=0.0, le=100.0)
    rank: int
    band: Band
    pairs_used: int = 0
    pairs_skipped: int = 0


def _model_name(pairs: Sequence[ParallelPair]) -> str:
    names = sorted({p.model for p in pairs})
    return names[0] if len(names) == 1 else ",".join(names)


def corpus_adi(
    pairs: Sequence[ParallelPair],
    model: Optional[str] = None,
    measure: str = "jsd",
    base: float = 2.0,
    threads: int = 1,
    progress: bool = False,
) -> CorpusDivergence:
    """Mean of ``pair_divergence`` over the non-skipped pairs of one model."""
    model = model or _model_name(pairs)
    if not pairs:
        raise AllPairsSkippedError(model, 0)

    def _one(pair: ParallelPair) -> Optional[float]:
        return pair_divergence(pair, measure=measure, base=base)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(tqdm(pool.map(_one, pairs), total=len(pairs), desc=model, disable=not progress))
    else:
        values = [_one(p) for p in tqdm(pairs, desc=model, disable=not progress)]

    used = [v for v in values if v is not None]
    skipped = len(values) - len(used)
    if not used:
        raise AllPairsSkippedError(model, len(pairs))
    if skipped:
        logger.warning("Model '%s': skipped %d of %d pairs with no shared vocabulary", model, skipped, len(pairs))

    raw = math.inf if any(math.isinf(v) for v in used) else math.fsum(used) / len(used)
    return CorpusDivergence(model=model, raw_mean=raw, pairs_used=len(used), pairs_skipped=skipped, measure=measure)


def band_for(adi: float, thresholds: Sequence[float] = DEFAULT_BAND_THRESHOLDS) -> Band:
    low, high = thresholds
    if adi < low:
        return Band.EASY_TO_DETECT
    if adi < high:
        return Band.DETECTABLE
    return Band.DIFFICULT_TO_DETECT


def adi_spectrum(
    raw: Mapping[str, Union[float, CorpusDivergence]],
    thresholds: Sequence[float] = DEFAULT_BAND_THRESHOLDS,
    grid: Optional[Sequence[float]] = None,
    inf_value: Optional[float] = None,
) -> List[DetectabilityScore]:
    """Turn per-model raw mean divergences into ranked 0-100 ADI scores.

    Raw means are divided by their maximum (so the spectrum does not depend on
    the logarithm base), Yeo-Johnson transformed jointly over ``grid``, negated
    and min-max scaled: the lowest divergence gets 100, the hardest model to
    detect.

    An infinite mean (KL with a context word one side never uses) is an error
    unless ``inf_value`` is given; it then stands in for +inf before
    normalisation, so such models land at the easy end of the spectrum.
    """
    if len(raw) < 2:
        raise SpectrumError(f"adi_spectrum needs at least 2 models, got {len(raw)}")

    models = sorted(raw)
    entries = [raw[m] for m in models]
    values = np.array(
        [e.raw_mean if isinstance(e, CorpusDivergence) else float(e) for e in entries],
        dtype=np.float64,
    )
    if inf_value is not None and np.isposinf(values).any():
        logger.warning(
            "Infinite raw divergence for %s; using %g in its place",
            ", ".join(m for m, v in zip(models, values) if np.isposinf(v)),
            inf_value,
        )
        values = np.where(np.isposinf(values), float(inf_value), values)
    if not np.all(np.isfinite(values)):
        bad = [m for m, v in zip(models, values) if not np.isfinite(v)]
        raise SpectrumError(f"non-finite raw divergence for {', '.join(bad)}")

    scale = values.max()
    normalized = values / scale if scale > 0 else values
    transformed, lmbda = yeo_johnson(normalized, grid=grid)
    logger.debug("adi_spectrum: Yeo-Johnson lambda=%.2f over %d models", lmbda, len(models))
    adi = min_max_scale(-transformed, 0.0, 100.0)

    order = sorted(range(len(models)), key=lambda i: (-adi[i], models[i]))
    ranks = {i: r for r, i in enumerate(order, start=1)}

    scores = []
    for i, m in enumerate(models):
        e = entries[i]
        scores.append(
            DetectabilityScore(
                model=m,
                raw_mean_jsd=float(values[i]),
                transformed=float(transformed[i]),
                adi=float(adi[i]),
                rank=ranks[i],
                band=band_for(float(adi[i]), thresholds),
                pairs_used=e.pairs_used if isinstance(e, CorpusDivergence) else 0,
                pairs_skipped=e.pairs_skipped if isinstance(e, CorpusDivergence) else 0,
            )
        )
    return sorted(scores, key=lambda s: s.rank)


def grouped_adi_spectrum(
    raw: Mapping[Tuple[str, str], Union[float, CorpusDivergence]],
    scope: str = "joint",
    thresholds: Sequence[float] = DEFAULT_BAND_THRESHOLDS,
    **fit_kwargs,
) -> Dict[str, List[DetectabilityScore]]:
    """Spectra keyed by source; ``scope`` picks one joint fit or one fit per source.

    ``fit_kwargs`` (``grid``, ``inf_value``) go to every ``adi_spectrum`` call.
    """
    if scope == "joint":
        joint = adi_spectrum({f"{src}/{model}": v for (src, model), v in raw.items()}, thresholds, **fit_kwargs)
        return {"all": joint}
    if scope == "per_source":
        by_source: Dict[str, Dict[str, Union[float, CorpusDivergence]]] = {}
        for (src, model), v in raw.items():
            by_source.setdefault(src, {})[model] = v
        return {src: adi_spectrum(group, thresholds, **fit_kwargs) for src, group in sorted(by_source.items())}
    raise ValueError(f"Unknown fit scope '{scope}' (expected 'joint' or 'per_source')")


def group_pairs(pairs: Sequence[ParallelPair], by_source: bool = False) -> Dict[Union[str, Tuple[str, str]], List[ParallelPair]]:
    groups: Dict = {}
    for pair in pairs:
        key = (pair.source, pair.model) if by_source else pair.model
        groups.setdefault(key, []).append(pair)
    return groups


class DivergenceComparison(BaseModel):
    model: str
    mean_jsd: float
    mean_kl: float
    infinite_kl_pairs: int
    pairs_used: int


def compare_divergences(
    pairs_by_model: Mapping[str, Sequence[ParallelPair]],
    base: float = 2.0,
) -> List[DivergenceComparison]:
    """Mean JSD next to mean KL per model; KL blows up on unseen context words."""
    rows = []
    for model in sorted(pairs_by_model):
        pairs = pairs_by_model[model]
        jsd = corpus_adi(pairs, model=model, measure="jsd", base=base)
        kl_values = [pair_divergence(p, measure="kl", base=base) for p in pairs]
        kl_values = [v for v in kl_values if v is not None]
        n_inf = sum(1 for v in kl_values if math.isinf(v))
        mean_kl = math.inf if n_inf else math.fsum(kl_values) / len(kl_values)
        rows.append(
            DivergenceComparison(
                model=model,
                mean_jsd=jsd.raw_mean,
                mean_kl=mean_kl,
                infinite_kl_pairs=n_inf,
                pairs_used=jsd.pairs_used,
            )
        )
    return rows
