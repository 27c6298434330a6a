from .distortion import bleu, edit_distance, semantic_similarity
from .green_list import (
    TokenStream,
    WatermarkReport,
    detect,
    dump_streams,
    green_list,
    green_mask,
    green_matrix,
    is_green,
    load_streams,
    z_score,
)
from .simulate import perturb, simulate_stream
from .tradeoff import (
    TRADEOFF_COLUMNS,
    TradeoffPoint,
    gamma_sweep,
    median_p_by_fraction,
    rewrite_tradeoff,
    tradeoff_curve,
    tradeoff_frame,
)

__all__ = [
    "TRADEOFF_COLUMNS",
    "TokenStream",
    "TradeoffPoint",
    "WatermarkReport",
    "bleu",
    "detect",
    "dump_streams",
    "edit_distance",
    "gamma_sweep",
    "green_list",
    "green_mask",
    "green_matrix",
    "is_green",
    "load_streams",
    "median_p_by_fraction",
    "perturb",
    "rewrite_tradeoff",
    "semantic_similarity",
    "simulate_stream",
    "tradeoff_curve",
    "tradeoff_frame",
    "z_score",
]
