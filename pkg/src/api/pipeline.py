"""
Main API for the AVR crisis detector
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from ..core.detect import (
    Classification,
    DetectionPolicy,
    EventFlag,
    NoiseReference,
    SweepReport,
    noise_reference,
    resolve_reference,
    robustness_sweep,
)
from ..core.engine import AnalysisConfig, WindowResult, run
from ..core.ingest import PriceSeries
from ..utils.metrics import summarize_zeta, zeta_values

logger = logging.getLogger(__name__)

DEGENERATE_MEAN = "quiet/degenerate-mean"


@dataclass
class CrisisReport:
    """
    Detected events of one series

    ``status`` is the strongest classification among the events, or
    "quiet/degenerate-mean" when every window has zero area.
    """
    series_name: str
    config: AnalysisConfig
    policy: DetectionPolicy
    status: str
    events: List[EventFlag]
    zeta_summary: Dict[str, Optional[float]]
    noise: Optional[NoiseReference] = None
    reference_index: Optional[int] = None
    skipped: List[Tuple[Tuple[int, int, int], str]] = field(default_factory=list)

    def to_dict(self) -> Dict:
        noise = None
        if self.noise is not None:
            noise = dict(self.noise.summary, degenerate=self.noise.degenerate, flagged=self.noise.flagged)
        return {
            'series': self.series_name,
            'status': self.status,
            'config': {
                'N': self.config.N,
                'T': self.config.T,
                'l': self.config.l,
                't0': self.config.t0,
                'warmup': self.config.warmup,
                'q_min': self.config.grid.q_min,
                'q_max': self.config.grid.q_max,
                'dq': self.config.grid.dq,
            },
            'policy': {
                'noise_floor': self.policy.noise_floor,
                'jump_factor': self.policy.jump_factor,
                'threshold': self.policy.threshold,
                'lobe_prominence': self.policy.lobe_prominence,
                'sweep_persistence': self.policy.sweep_persistence,
            },
            'zeta': self.zeta_summary,
            'noise_reference': noise,
            'reference_index': self.reference_index,
            'events': [event.to_record() for event in self.events],
            'skipped_configurations': [
                {'N': N, 'T': T, 'l': l, 'reason': reason} for (N, T, l), reason in self.skipped
            ],
        }


class CrisisPipeline:
    """
    Ingested series to classified events in one object
    """

    def __init__(
        self,
        series: PriceSeries,
        config: Optional[AnalysisConfig] = None,
        policy: Optional[DetectionPolicy] = None,
        seed: int = 0,
        workers: int = 1,
        noise_basis: str = "levels",
    ):
        """
        Initialize the pipeline

        Parameters:
        -----------
        series : PriceSeries
            Input series
        config : AnalysisConfig
            Base window configuration
        policy : DetectionPolicy
            Detection thresholds and sweep lists
        seed : int
            Seed of the moment-matched noise reference
        workers : int
            Thread count for window spectra and sweep members
        noise_basis : str
            "levels" or "increments"
        """
        self.series = series
        self.config = config or AnalysisConfig()
        self.policy = policy or DetectionPolicy()
        self.seed = seed
        self.workers = workers
        self.noise_basis = noise_basis

    def compute_trace(self, attach_spectra: bool = False) -> Tuple[List[WindowResult], float]:
        """zeta trace of the base configuration and its runtime"""
        start_time = time.time()
        results = run(self.series, self.config, workers=self.workers, attach_spectra=attach_spectra)
        return results, time.time() - start_time

    def compute_noise_reference(self) -> Tuple[NoiseReference, float]:
        start_time = time.time()
        reference = noise_reference(
            self.series, self.config, self.policy,
            seed=self.seed, basis=self.noise_basis, workers=self.workers,
        )
        return reference, time.time() - start_time

    def compute_sweep(
        self,
        reference_index: Union[int, str, None] = None,
        policy: Optional[DetectionPolicy] = None,
    ) -> Tuple[SweepReport, float]:
        start_time = time.time()
        report = robustness_sweep(
            self.series, self.config, policy or self.policy,
            reference_index=reference_index, workers=self.workers,
        )
        return report, time.time() - start_time

    def compute_complete_analysis(
        self,
        reference_index: Union[int, str, None] = None,
        with_noise: bool = True,
        measured_noise_floor: bool = False,
    ) -> Tuple[CrisisReport, SweepReport, float]:
        """
        Noise reference, robustness sweep and classification

        Parameters:
        -----------
        reference_index : int or str
            Reference index or date for lead times
        with_noise : bool
            Compute the moment-matched noise reference
        measured_noise_floor : bool
            Replace the policy's noise floor by the measured noise maximum

        Returns:
        --------
        report : CrisisReport
            Classified events
        sweep : SweepReport
            Base trace with spectra and per-configuration traces
        elapsed : float
            Total runtime in seconds
        """
        start_time = time.time()

        noise = None
        if with_noise or measured_noise_floor:
            noise, _ = self.compute_noise_reference()
        policy = self.policy
        if measured_noise_floor and noise is not None:
            policy = policy.with_measured_noise_floor(noise)

        sweep, _ = self.compute_sweep(reference_index=reference_index, policy=policy)
        base = sweep.base_results

        status = sweep.status
        defined = [r for r in base if not r.degenerate and r.n > self.config.warmup]
        if defined and all(r.zero_mean for r in defined):
            status = DEGENERATE_MEAN

        report = CrisisReport(
            series_name=self.series.name,
            config=self.config,
            policy=policy,
            status=status,
            events=sweep.events,
            zeta_summary=summarize_zeta(zeta_values(base)),
            noise=noise if with_noise else None,
            reference_index=resolve_reference(self.series, reference_index),
            skipped=list(sweep.skipped),
        )
        crises = sum(e.classification is Classification.SYSTEMIC_CRISIS for e in sweep.events)
        logger.info("%s: %d events, %d systemic crises, status %s", self.series.name, len(sweep.events), crises, status)

        return report, sweep, time.time() - start_time
