"""
AVR Crisis Detector
===================
Multifractal area variation rate of a price series, compared against
moment-matched noise and classified by its stability under changes of
window size, lag and shift
"""

__version__ = "1.0.0"

from .core.detect import DetectionPolicy, EventFlag, robustness_sweep
from .core.engine import AnalysisConfig, run
from .core.ingest import PriceSeries, SyntheticSpec, generate_synthetic, parse_series
from .core.mfcore import QGrid
from .api.pipeline import CrisisPipeline

__all__ = [
    'AnalysisConfig',
    'CrisisPipeline',
    'DetectionPolicy',
    'EventFlag',
    'PriceSeries',
    'QGrid',
    'SyntheticSpec',
    'generate_synthetic',
    'parse_series',
    'robustness_sweep',
    'run',
]
