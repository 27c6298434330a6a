"""Forensics toolkit for AI-generated text: detectability spectra, watermark robustness,
embedding geometry and lightweight detectors."""

__version__ = "0.1.0"
