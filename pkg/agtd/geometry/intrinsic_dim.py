"""Intrinsic dimension of embedding point clouds: k-NN MLE and MST-growth (PHD)."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist
from sklearn.neighbors import NearestNeighbors
from tqdm import tqdm

from agtd.dataflows.utils import derive_seed
from agtd.errors import CloudTooLargeError, GeometryError, NonPhysicalSlopeError, PointCloudFormatError

logger = logging.getLogger(__name__)

DUPLICATE_TOLERANCE = 1e-12
MST_MAX_POINTS = 4000


class PointCloud:
    """An n x d matrix of finite coordinates with no duplicate rows."""

    def __init__(self, points: ArrayLike):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2:
            raise PointCloudFormatError(f"points must form an n x d matrix, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            bad = int(np.flatnonzero(~np.all(np.isfinite(pts), axis=1))[0])
            raise PointCloudFormatError("non-finite coordinate", row=bad + 1)
        pts = _drop_duplicates(pts)
        if pts.shape[0] < 2:
            raise PointCloudFormatError(f"need at least 2 distinct points, got {pts.shape[0]}")
        self.points = pts
        self.points.setflags(write=False)

    @classmethod
    def from_array(cls, points: ArrayLike) -> "PointCloud":
        return cls(points)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def subset(self, idx: np.ndarray) -> "PointCloud":
        return PointCloud(self.points[idx])

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"PointCloud(n={self.n}, d={self.d})"


def _drop_duplicates(points: np.ndarray) -> np.ndarray:
    pairs = cKDTree(points).query_pairs(r=DUPLICATE_TOLERANCE, output_type="ndarray")
    if len(pairs) == 0:
        return points
    drop = np.unique(pairs.max(axis=1))
    logger.warning("Dropped %d duplicate points (within %g)", len(drop), DUPLICATE_TOLERANCE)
    return np.delete(points, drop, axis=0)


class IntrinsicDimReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    mle: float = Field(gt=0.0)
    phd: float
    phd_slope: float = Field(lt=1.0)
    phd_r2: float = Field(ge=0.0, le=1.0)
    n_used: int


class PHDFit(BaseModel):
    model_config = ConfigDict(frozen=True)

    phd: float
    slope: float
    r2: float
    sizes: List[int]
    lengths: List[float]


def mle_dimension(cloud: PointCloud, k: int = 20) -> float:
    """Levina-Bickel estimate, pooled by averaging the per-point inverses."""
    if k < 2:
        raise GeometryError(f"k must be >= 2, got {k}")
    if cloud.n <= k:
        raise GeometryError(f"mle_dimension needs more than k={k} points, got {cloud.n}")

    nbrs = NearestNeighbors(n_neighbors=k + 1).fit(cloud.points)
    distances, _ = nbrs.kneighbors(cloud.points)
    # column 0 is the point itself
    distances = distances[:, 1:]
    log_ratios = np.log(distances[:, -1:] / distances[:, :-1])
    inverse = log_ratios.sum(axis=1) / (k - 1)
    return 1.0 / (math.fsum(inverse) / cloud.n)


def mst_total_length(cloud: PointCloud, max_points: int = MST_MAX_POINTS) -> float:
    """Total edge weight of the Euclidean minimum spanning tree.

    Prim's algorithm over the implicit dense graph; distance rows are computed
    as vertices join, so memory stays linear in n.
    """
    n = cloud.n
    if n > max_points:
        raise CloudTooLargeError(f"{n} points exceed the MST cutoff of {max_points}; subsample first")
    pts = cloud.points
    in_tree = np.zeros(n, dtype=bool)
    best = np.full(n, np.inf)
    in_tree[0] = True
    best = np.minimum(best, cdist(pts[:1], pts)[0])
    edges = []
    for _ in range(n - 1):
        candidates = np.where(in_tree, np.inf, best)
        nxt = int(np.argmin(candidates))
        edges.append(candidates[nxt])
        in_tree[nxt] = True
        best = np.minimum(best, cdist(pts[nxt : nxt + 1], pts)[0])
    return math.fsum(edges)


def _subset_sizes(n: int, min_subset: int, n_sizes: int) -> np.ndarray:
    return np.unique(np.round(np.geomspace(min_subset, n, n_sizes)).astype(int))


def phd_dimension(
    cloud: PointCloud,
    min_subset: int = 40,
    n_sizes: int = 8,
    repeats: int = 3,
    rng_seed: int = 0,
    threads: int = 1,
    progress: bool = False,
    max_points: int = MST_MAX_POINTS,
) -> PHDFit:
    """Fit ln(median MST length) against ln(subset size); d = 1 / (1 - slope)."""
    if cloud.n < 2 * min_subset:
        raise GeometryError(f"phd_dimension needs n >= {2 * min_subset}, got {cloud.n}")
    sizes = _subset_sizes(cloud.n, min_subset, n_sizes)
    jobs: List[Tuple[int, int]] = [(int(s), r) for s in sizes for r in range(repeats)]

    def _resample(job: Tuple[int, int]) -> float:
        size, r = job
        rng = np.random.default_rng(derive_seed(rng_seed, f"phd:{size}:{r}"))
        idx = np.sort(rng.choice(cloud.n, size=size, replace=False))
        return mst_total_length(PointCloud(cloud.points[idx]), max_points=max_points)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            lengths = list(tqdm(pool.map(_resample, jobs), total=len(jobs), desc="phd", disable=not progress))
    else:
        lengths = [_resample(j) for j in tqdm(jobs, desc="phd", disable=not progress)]

    per_size = np.median(np.asarray(lengths).reshape(len(sizes), repeats), axis=1)
    x, y = np.log(sizes.astype(np.float64)), np.log(per_size)
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(residual**2)) / ss_tot if ss_tot > 0 else 1.0
    r2 = min(max(r2, 0.0), 1.0)
    if slope >= 1.0:
        raise NonPhysicalSlopeError(f"non-physical slope {slope:.4f} >= 1 (degenerate cloud)")
    logger.debug("phd fit: sizes=%s slope=%.4f r2=%.4f", sizes.tolist(), slope, r2)
    return PHDFit(
        phd=1.0 / (1.0 - slope),
        slope=float(slope),
        r2=r2,
        sizes=sizes.tolist(),
        lengths=per_size.tolist(),
    )


def estimate_intrinsic_dimension(
    cloud: PointCloud,
    k: int = 20,
    min_subset: int = 40,
    n_sizes: int = 8,
    repeats: int = 3,
    rng_seed: int = 0,
    threads: int = 1,
    progress: bool = False,
    max_points: Optional[int] = None,
) -> IntrinsicDimReport:
    fit = phd_dimension(
        cloud,
        min_subset=min_subset,
        n_sizes=n_sizes,
        repeats=repeats,
        rng_seed=rng_seed,
        threads=threads,
        progress=progress,
        max_points=max_points or MST_MAX_POINTS,
    )
    return IntrinsicDimReport(
        mle=mle_dimension(cloud, k=k),
        phd=fit.phd,
        phd_slope=fit.slope,
        phd_r2=fit.r2,
        n_used=cloud.n,
    )
