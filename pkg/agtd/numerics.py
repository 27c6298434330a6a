"""Shared numeric primitives.

Divergences are computed in base 2 by default so the Jensen-Shannon divergence
lies in [0, 1]. Every reduction goes through ``math.fsum`` so results do not
depend on summation order.
"""

import logging
import math
from typing import Annotated, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike
from scipy import special, stats

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

# Reports print this in place of an infinite KL divergence.
KL_INFINITY_SENTINEL = 1000.0

YEO_JOHNSON_GRID = np.round(np.linspace(-5.0, 5.0, 1001), 2)


def lambda_grid(lo: float, hi: float, step: float) -> np.ndarray:
    """Evenly spaced Yeo-Johnson candidates from ``lo`` to ``hi`` inclusive."""
    if not step > 0 or not hi > lo:
        raise ValueError(f"lambda grid needs lo < hi and step > 0, got ({lo}, {hi}, {step})")
    n = int(round((hi - lo) / step)) + 1
    return np.round(lo + step * np.arange(n), 10)


def splitmix64(x: int) -> int:
    """One step of the splitmix64 mixer on a 64-bit integer."""
    z = (x + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix64_array(x: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64 over a uint64 array (wraps mod 2**64)."""
    z = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = z + np.uint64(GOLDEN_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def as_distribution(probs: ArrayLike, tol: float = 1e-9) -> np.ndarray:
    """Validate ``probs`` as a probability vector and return it as float64."""
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1:
        raise ValueError(f"Distribution must be one-dimensional, got shape {p.shape}")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError("Distribution entries must be finite and non-negative")
    total = math.fsum(p)
    if abs(total - 1.0) > tol:
        raise ValueError(f"Distribution must sum to 1 (got {total!r})")
    return p


def _check_lengths(p: np.ndarray, q: np.ndarray) -> None:
    if p.shape != q.shape:
        raise ValueError(f"Support length mismatch: {p.shape[0]} != {q.shape[0]}")


def kl_divergence(
    p: Annotated[ArrayLike, "distribution P"],
    q: Annotated[ArrayLike, "distribution Q"],
    base: float = 2.0,
) -> float:
    """KL(p || q). Returns ``math.inf`` iff some p_i > 0 has q_i = 0."""
    p = as_distribution(p)
    q = as_distribution(q)
    _check_lengths(p, q)
    terms = special.rel_entr(p, q)
    if np.isinf(terms).any():
        return math.inf
    return math.fsum(terms) / math.log(base)


def js_divergence(
    p: Annotated[ArrayLike, "distribution P"],
    q: Annotated[ArrayLike, "distribution Q"],
    base: float = 2.0,
) -> float:
    """Jensen-Shannon divergence, 0.5*KL(p||m) + 0.5*KL(q||m) with m the mean."""
    p = as_distribution(p)
    q = as_distribution(q)
    _check_lengths(p, q)
    m = (p + q) / 2.0
    left = math.fsum(special.rel_entr(p, m))
    right = math.fsum(special.rel_entr(q, m))
    js = 0.5 * left / math.log(base) + 0.5 * right / math.log(base)
    # rounding can leave a tiny negative residue
    return max(js, 0.0)


def report_value(x: float, sentinel: float = KL_INFINITY_SENTINEL) -> float:
    """Replace +-inf by the signed report sentinel; never use inside computations."""
    return math.copysign(sentinel, x) if math.isinf(x) else x


def yeo_johnson(
    values: ArrayLike,
    lmbda: Optional[float] = None,
    grid: Optional[Sequence[float]] = None,
) -> Tuple[np.ndarray, float]:
    """Yeo-Johnson power transform.

    With ``lmbda`` given, applies psi(x; lmbda). Otherwise lambda maximizes the
    Gaussian profile log-likelihood over ``grid`` (default -5..5 step 0.01); the
    first maximum wins. All-identical input is returned unchanged with lambda=1.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        raise ValueError("yeo_johnson needs at least one value")
    if lmbda is not None:
        return stats.yeojohnson(x, lmbda=float(lmbda)), float(lmbda)
    if np.all(x == x[0]):
        logger.debug("yeo_johnson: constant input, returning identity with lambda=1")
        return x.copy(), 1.0

    candidates = YEO_JOHNSON_GRID if grid is None else np.asarray(grid, dtype=np.float64)
    llf = np.array([stats.yeojohnson_llf(lam, x) for lam in candidates])
    best = float(candidates[int(np.nanargmax(llf))])
    return stats.yeojohnson(x, lmbda=best), best


def min_max_scale(values: ArrayLike, lo: float = 0.0, hi: float = 100.0) -> np.ndarray:
    """Affine map sending min -> lo and max -> hi; constant input maps to lo."""
    if not hi > lo:
        raise ValueError(f"min_max_scale requires hi > lo (got lo={lo}, hi={hi})")
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        raise ValueError("min_max_scale needs at least one value")
    vmin, vmax = x.min(), x.max()
    if vmax == vmin:
        return np.full_like(x, lo)
    scaled = lo + (x - vmin) / (vmax - vmin) * (hi - lo)
    scaled = np.where(x == vmax, hi, scaled)
    return np.where(x == vmin, lo, scaled)


def normal_upper_tail(z: float) -> float:
    """1 - Phi(z), evaluated through erfc."""
    return float(0.5 * special.erfc(z / math.sqrt(2.0)))
