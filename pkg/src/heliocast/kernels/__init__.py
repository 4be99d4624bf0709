"""Scoring kernels: compiled extension when available, numpy otherwise."""

try:
    from ._fast import band_depth, mean_pairwise_abs

    BACKEND = "compiled"
except ImportError:  # extension not built
    from ._ref import band_depth, mean_pairwise_abs

    BACKEND = "reference"

__all__ = ["band_depth", "mean_pairwise_abs", "BACKEND"]
