"""Training-based detection for MIMO links with low-resolution ADCs."""

from . import analysis, baselines, core, detection, harness, sic, training

__all__ = [
    "analysis",
    "baselines",
    "core",
    "detection",
    "harness",
    "sic",
    "training",
]

__version__ = "0.1.0"
