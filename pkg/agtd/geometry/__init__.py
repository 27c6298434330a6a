from .intrinsic_dim import (
    IntrinsicDimReport,
    PHDFit,
    PointCloud,
    estimate_intrinsic_dimension,
    mle_dimension,
    mst_total_length,
    phd_dimension,
)

__all__ = [
    "IntrinsicDimReport",
    "PHDFit",
    "PointCloud",
    "estimate_intrinsic_dimension",
    "mle_dimension",
    "mst_total_length",
    "phd_dimension",
]
