"""Utility functions for zeta statistics and output tables"""

from .metrics import prior_median, summarize_zeta, zeta_values
from .tables import accumulated_frame, noise_frame, spectrum_frame, trace_frame

__all__ = [
    "zeta_values",
    "summarize_zeta",
    "prior_median",
    "trace_frame",
    "spectrum_frame",
    "accumulated_frame",
    "noise_frame",
]
