from agtd.adi import adi_spectrum, corpus_adi, group_pairs
from agtd.dataflows.config import set_config
from agtd.dataflows.corpus import load_corpus, pair_documents, split_by_label
from agtd.default_config import DEFAULT_CONFIG
from agtd.watermark import simulate_stream, detect, perturb

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Create a custom config
config = DEFAULT_CONFIG.copy()
config["adi_band_thresholds"] = [33.3, 66.6]  # easy / detectable / difficult cut points
config["watermark_gamma"] = 0.25  # smaller green list
config["watermark_delta"] = 4.0  # stronger bias
set_config(config)

# Detectability spectrum over a paired corpus
humans, ais = split_by_label(load_corpus("tests/fixtures/pairs.jsonl"))
pairs = pair_documents(humans, ais).pairs
raw = {model: corpus_adi(ps, model=model) for model, ps in group_pairs(pairs).items()}
for score in adi_spectrum(raw):
    print(score.rank, score.model, round(score.adi, 2), score.band.value)

# Watermark survives light edits, not heavy ones
stream = simulate_stream(1000, 200, config["watermark_gamma"], config["watermark_delta"], config["watermark_key"], rng_seed=7)
for fraction in (0.0, 0.3, 1.0):
    report = detect(perturb(stream, fraction, rng_seed=11), config["watermark_gamma"], config["watermark_key"])
    print(fraction, round(report.z, 3), report.detected)

# python -m cli.main
