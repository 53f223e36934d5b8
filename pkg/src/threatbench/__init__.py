"""Benchmark pipeline for insider-threat classifiers over CERT-style logs."""

__version__ = "0.1.0"
