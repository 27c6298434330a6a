import os

DEFAULT_CONFIG = {
    "cache_dir": os.getenv(
        "AGTD_CACHE_DIR",
        os.path.join(
            os.path.abspath(os.path.join(os.path.dirname(__file__), ".")),
            "dataflows/rewrite_cache",
        ),
    ),
    # Divergence settings
    "divergence_base": 2.0,
    "kl_report_sentinel": 1000.0,  # stands in for +inf in reports and KL spectra
    # ADI settings
    "adi_measure": "jsd",              # Options: jsd, kl
    "adi_fit_scope": "joint",          # Options: joint, per_source
    "adi_band_thresholds": [33.3, 66.6],
    "yeo_johnson_grid": [-5.0, 5.0, 0.01],
    # Watermark settings
    "watermark_gamma": 0.5,
    "watermark_delta": 2.0,
    "watermark_key": 15485863,
    "watermark_threshold": 0.01,
    "vocab_size": 1000,
    "stream_length": 200,
    "n_streams": 100,
    "perturb_fractions": [0.0, 0.25, 0.5, 0.75, 1.0],
    "bleu_max_n": 4,
    # Intrinsic dimension settings
    "mle_k": 20,
    "phd_min_subset": 40,
    "phd_n_sizes": 8,
    "phd_repeats": 3,
    "mst_max_points": 4000,
    # Rewrite source configuration
    # Comma-separated, first entry is primary, the rest are fallbacks
    "rewrite_vendor": "file,command",  # Options: file, command
    "rewrites_file": None,             # JSON-lines {"id", "rewrites": [...]}
    "rewriter_command": None,          # e.g. "ollama-rewrite --prompt {prompt}"
    "rewriter_timeout": 120.0,
    # Classifier settings
    "l2": 1e-3,
    "epochs": 500,
    "lr": 0.1,
    "decision_threshold": 0.5,
    "holdout_fraction": 0.2,
    # Run settings
    "seed": 0,
    "threads": 1,
    "float_format": "%.6f",
}
