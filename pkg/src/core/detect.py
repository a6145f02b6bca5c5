"""
Crisis detection on zeta traces
Noise-floor comparison, jump detection, second-lobe detection and the
(N, T, l) robustness sweep that separates systemic crises from scares
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.signal import find_peaks

from .engine import AnalysisConfig, WindowResult, map_index, run
from .errors import ConfigError, NoWindowError, SweepError
from .ingest import PriceSeries, SyntheticSpec, generate_synthetic, match_moments
from .mfcore import Spectrum
from ..utils.metrics import summarize_zeta, zeta_values

logger = logging.getLogger(__name__)

ConfigKey = Tuple[int, int, int]


class Classification(str, Enum):
    SYSTEMIC_CRISIS = "systemic_crisis"
    SCARE = "scare"
    QUIET = "quiet"


@dataclass(frozen=True)
class DetectionPolicy:
    """
    Thresholds of the detector

    Parameters:
    -----------
    noise_floor : float
        Typical zeta of event-free data
    jump_factor : float
        A window is flagged when zeta >= jump_factor * noise_floor
    lobe_prominence : float
        Minimum lobe prominence as a fraction of max C(q)
    sweep_persistence : float
        Fraction of sweep configurations that must flag an event
    sweep_N, sweep_T, sweep_l : tuple of int
        Parameter lists of the robustness sweep
    match_tolerance : int
        Events match across configurations when their anchors lie within
        match_tolerance * l of each other
    align_start : bool
        Give every sweep configuration the base configuration's first
        evaluation index
    """
    noise_floor: float = 1e-3
    jump_factor: float = 10.0
    lobe_prominence: float = 0.05
    sweep_persistence: float = 0.8
    sweep_N: Tuple[int, ...] = (500, 1000, 1500)
    sweep_T: Tuple[int, ...] = (1, 2, 5)
    sweep_l: Tuple[int, ...] = (1, 5)
    match_tolerance: int = 5
    align_start: bool = True

    def __post_init__(self):
        for name in ("sweep_N", "sweep_T", "sweep_l"):
            values = tuple(int(v) for v in getattr(self, name))
            if not values:
                raise ConfigError(f"{name} must not be empty")
            if min(values) <= 0:
                raise ConfigError(f"{name} entries must be positive, got {values}")
            object.__setattr__(self, name, values)
        if self.noise_floor <= 0 or self.jump_factor <= 0 or self.lobe_prominence <= 0:
            raise ConfigError("noise_floor, jump_factor and lobe_prominence must be positive")
        if not 0 < self.sweep_persistence <= 1:
            raise ConfigError(f"sweep_persistence must lie in (0, 1], got {self.sweep_persistence}")
        if self.match_tolerance < 0:
            raise ConfigError(f"match_tolerance must be nonnegative, got {self.match_tolerance}")

    @property
    def threshold(self) -> float:
        return self.jump_factor * self.noise_floor

    def with_measured_noise_floor(self, reference: "NoiseReference") -> "DetectionPolicy":
        """Policy whose noise floor is the measured maximum zeta of the noise run"""
        measured = reference.summary.get("max")
        if not measured or measured <= 0:
            logger.warning("noise reference has no usable zeta; keeping noise floor %g", self.noise_floor)
            return self
        return replace(self, noise_floor=measured)


@dataclass(frozen=True)
class Candidate:
    """A run of consecutive flagged windows, anchored at the first one"""
    n_first: int
    n_last: int
    t_prime: int
    label: Optional[str]
    zeta: float
    peak_zeta: float


@dataclass(frozen=True)
class LobeReport:
    positions: Tuple[float, ...] = ()
    heights: Tuple[float, ...] = ()
    has_second_lobe: bool = False


@dataclass
class NoiseReference:
    """zeta statistics of the moment-matched noise run"""
    spec: SyntheticSpec
    summary: Dict[str, Optional[float]]
    degenerate: bool = False
    flagged: int = 0
    results: List[WindowResult] = field(default_factory=list)


@dataclass
class EventFlag:
    """A detected event with its sweep persistence and classification"""
    t_prime: int
    label: Optional[str]
    zeta: Optional[float]
    has_second_lobe: bool
    lobe_positions: Tuple[float, ...]
    persistence: float
    classification: Classification
    n: Optional[int] = None
    lead_time: Optional[int] = None
    members: Tuple[ConfigKey, ...] = ()

    def to_record(self) -> Dict:
        return {
            'anchor_index': self.t_prime,
            'date': self.label,
            'window': self.n,
            'zeta': self.zeta,
            'has_second_lobe': self.has_second_lobe,
            'lobe_positions': list(self.lobe_positions),
            'persistence': self.persistence,
            'classification': self.classification.value,
            'lead_time': self.lead_time,
            'configurations': [f"N={N},T={T},l={l}" for N, T, l in self.members],
        }


@dataclass
class SweepMember:
    config: AnalysisConfig
    results: List[WindowResult]
    candidates: List[Candidate]


@dataclass
class SweepReport:
    """Outcome of a robustness sweep"""
    base_config: AnalysisConfig
    policy: DetectionPolicy
    events: List[EventFlag]
    base_results: List[WindowResult]
    members: Dict[ConfigKey, SweepMember]
    skipped: List[Tuple[ConfigKey, str]] = field(default_factory=list)

    @property
    def crises(self) -> List[EventFlag]:
        return [e for e in self.events if e.classification is Classification.SYSTEMIC_CRISIS]

    @property
    def status(self) -> str:
        if any(e.classification is Classification.SYSTEMIC_CRISIS for e in self.events):
            return Classification.SYSTEMIC_CRISIS.value
        if any(e.classification is Classification.SCARE for e in self.events):
            return Classification.SCARE.value
        return Classification.QUIET.value


def detect_jumps(results: Sequence[WindowResult], policy: DetectionPolicy) -> List[Candidate]:
    """
    Flag windows with zeta >= jump_factor * noise_floor

    Consecutive flagged ordinals merge into one candidate anchored at the
    first of them.
    """
    threshold = policy.threshold
    candidates = []
    run_start = None
    run_end = None
    peak = 0.0

    def close():
        candidates.append(Candidate(
            n_first=run_start.n,
            n_last=run_end.n,
            t_prime=run_start.t_prime,
            label=run_start.label,
            zeta=run_start.zeta,
            peak_zeta=peak,
        ))

    for result in results:
        flagged = result.zeta is not None and result.zeta >= threshold
        if flagged and run_start is not None and result.n == run_end.n + 1:
            run_end = result
            peak = max(peak, result.zeta)
            continue
        if run_start is not None:
            close()
            run_start = None
        if flagged:
            run_start = run_end = result
            peak = result.zeta
    if run_start is not None:
        close()
    return candidates


def find_lobes(spectrum: Union[Spectrum, np.ndarray], policy: DetectionPolicy, q: Optional[np.ndarray] = None) -> LobeReport:
    """
    Local maxima of C(q) on the interior grid

    A maximum counts when its prominence (height above the higher of its
    two flanking minima) exceeds lobe_prominence * max C. A second lobe is
    present when at least two maxima exist and one of them lies at q > 0.
    """
    if isinstance(spectrum, Spectrum):
        c, q = spectrum.c, spectrum.q_interior
    else:
        c = np.asarray(spectrum, dtype=float)
        if q is None:
            raise ConfigError("q positions are required with a raw C array")
    q = np.asarray(q, dtype=float)

    top = float(np.max(c)) if c.size else 0.0
    if not np.isfinite(top) or top <= 0:
        return LobeReport()

    minimum = policy.lobe_prominence * top
    peaks, properties = find_peaks(c, prominence=minimum)
    keep = properties["prominences"] > minimum
    peaks = peaks[keep]

    positions = tuple(float(q[i]) for i in peaks)
    heights = tuple(float(c[i]) for i in peaks)
    second = len(positions) >= 2 and any(p > 0 for p in positions)
    return LobeReport(positions=positions, heights=heights, has_second_lobe=second)


def classify(zeta: Optional[float], has_second_lobe: bool, persistence: float, policy: DetectionPolicy) -> Classification:
    """
    Systemic crisis needs the jump, the q>0 second lobe and persistence.
    Any other jump is a scare; without a jump the window is quiet.
    """
    if zeta is None or zeta < policy.threshold:
        return Classification.QUIET
    if has_second_lobe and persistence >= policy.sweep_persistence:
        return Classification.SYSTEMIC_CRISIS
    return Classification.SCARE


def noise_reference(
    series: PriceSeries,
    config: AnalysisConfig,
    policy: Optional[DetectionPolicy] = None,
    seed: int = 0,
    basis: str = "levels",
    workers: int = 1,
) -> NoiseReference:
    """
    zeta statistics of white noise with the series' mean and variance

    Parameters:
    -----------
    series : PriceSeries
        Input series
    config : AnalysisConfig
        Same configuration as the input run
    policy : DetectionPolicy
        Used to count noise windows above the jump threshold
    seed : int
        Noise seed
    basis : str
        "levels" or "increments", see match_moments

    Returns:
    --------
    reference : NoiseReference
        ``degenerate`` is set when every noise window is degenerate
    """
    policy = policy or DetectionPolicy()
    spec = match_moments(series, seed=seed, basis=basis)
    noise = generate_synthetic(spec)
    try:
        results = run(noise, config, workers=workers)
    except NoWindowError as exc:
        logger.warning("noise reference is degenerate: %s", exc)
        return NoiseReference(spec=spec, summary=summarize_zeta([]), degenerate=True)

    zetas = zeta_values(results)
    flagged = int(np.sum(zetas >= policy.threshold))
    summary = summarize_zeta(zetas)
    logger.info("noise reference: max zeta %s over %d windows", summary['max'], summary['count'])
    return NoiseReference(spec=spec, summary=summary, flagged=flagged, results=results)


def sweep_configurations(
    series_length: int,
    base_config: AnalysisConfig,
    policy: DetectionPolicy,
) -> Tuple[List[AnalysisConfig], List[Tuple[ConfigKey, str]]]:
    """Cross product of the sweep lists, invalid members skipped"""
    first_evaluation = map_index(1, base_config)
    keys = set(product(policy.sweep_N, policy.sweep_T, policy.sweep_l))

    configs = []
    skipped = []
    for N, T, l in sorted(keys):
        t0 = base_config.t0
        if policy.align_start:
            t0 = max(0, first_evaluation - N - l)
        try:
            config = replace(base_config, N=N, T=T, l=l, t0=t0)
            config.window_count(series_length)
        except ConfigError as exc:
            logger.warning("skipping sweep configuration N=%d T=%d l=%d: %s", N, T, l, exc)
            skipped.append(((N, T, l), str(exc)))
            continue
        configs.append(config)
    return configs, skipped


def _cluster(entries: List[Tuple[int, ConfigKey, Candidate]], tolerance: int) -> List[List[Tuple[int, ConfigKey, Candidate]]]:
    # single linkage along the sorted anchors
    clusters = []
    for entry in sorted(entries, key=lambda e: (e[0], e[1])):
        if clusters:
            last = clusters[-1][-1]
            reach = tolerance * max(entry[1][2], last[1][2])
            if entry[0] - last[0] <= reach:
                clusters[-1].append(entry)
                continue
        clusters.append([entry])
    return clusters


def _window_at(results: List[WindowResult], anchor: int) -> WindowResult:
    for result in results:
        if result.t_prime >= anchor:
            return result
    return results[-1]


def resolve_reference(series: PriceSeries, reference: Union[int, str, None]) -> Optional[int]:
    """Series index of a reference given as an index or a date label"""
    if reference is None:
        return None
    if isinstance(reference, str):
        return series.index_of(reference)
    return int(reference)


def robustness_sweep(
    series: PriceSeries,
    base_config: AnalysisConfig,
    policy: DetectionPolicy,
    reference_index: Union[int, str, None] = None,
    workers: int = 1,
) -> SweepReport:
    """
    Classify events by their stability under changes of N, T and l

    Parameters:
    -----------
    series : PriceSeries
        Input series
    base_config : AnalysisConfig
        Configuration whose spectra decide the second-lobe status
    policy : DetectionPolicy
        Thresholds and sweep lists
    reference_index : int or str
        Reference index or date for the reported lead time
    workers : int
        Sweep configurations run concurrently on this many threads

    Returns:
    --------
    report : SweepReport
    """
    reference_index = resolve_reference(series, reference_index)
    base_results = run(series, base_config, workers=workers, attach_spectra=True)
    configs, skipped = sweep_configurations(len(series), base_config, policy)

    def run_member(config):
        if config == base_config:
            return config, base_results
        try:
            return config, run(series, config)
        except NoWindowError as exc:
            logger.warning("skipping sweep configuration N=%d T=%d l=%d: %s", config.N, config.T, config.l, exc)
            return config, None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_member, configs))
    else:
        outcomes = [run_member(config) for config in configs]

    members = {}
    for config, results in outcomes:
        if results is None:
            skipped.append((config.key, "all windows degenerate"))
            continue
        members[config.key] = SweepMember(config, results, detect_jumps(results, policy))
    if not members:
        raise SweepError("every sweep configuration was skipped")
    logger.info("swept %d configurations, skipped %d", len(members), len(skipped))

    entries = [
        (candidate.t_prime, key, candidate)
        for key, member in sorted(members.items())
        for candidate in member.candidates
    ]
    events = []
    for cluster in _cluster(entries, policy.match_tolerance):
        keys = tuple(sorted({key for _, key, _ in cluster}))
        persistence = len(keys) / len(members)

        base_candidates = [candidate for _, key, candidate in cluster if key == base_config.key]
        if base_candidates:
            # strongest base jump, earliest on ties
            anchor = max(base_candidates, key=lambda c: (c.peak_zeta, -c.t_prime)).t_prime
        else:
            anchors = sorted(anchor for anchor, _, _ in cluster)
            anchor = anchors[(len(anchors) - 1) // 2]

        window = _window_at(base_results, anchor)
        lobes = find_lobes(window.spectrum, policy) if window.spectrum is not None else LobeReport()
        zeta = window.zeta
        events.append(EventFlag(
            t_prime=anchor,
            label=series.label_at(anchor),
            zeta=zeta,
            has_second_lobe=lobes.has_second_lobe,
            lobe_positions=lobes.positions,
            persistence=persistence,
            classification=classify(zeta, lobes.has_second_lobe, persistence, policy),
            n=window.n,
            lead_time=None if reference_index is None else reference_index - anchor,
            members=keys,
        ))

    events.sort(key=lambda e: e.t_prime)
    return SweepReport(
        base_config=base_config,
        policy=policy,
        events=events,
        base_results=base_results,
        members=members,
        skipped=skipped,
    )
