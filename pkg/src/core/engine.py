"""
Sliding-window engine
Moves the analysis window along the series, maps window ordinals to series
indices and folds the area sequence A(n) into the area variation rate
zeta(n) = |A(n)/A_bar - 1|
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import ConfigError, DegenerateWindowError, NoWindowError, WindowRangeError
from .ingest import PriceSeries
from .mfcore import MIN_INCREMENTS, QGrid, Spectrum, analyze_window

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnalysisConfig:
    """
    Window parameters of one AVR run

    Parameters:
    -----------
    N : int
        Window size (number of increments), at least 16
    T : int
        Increment lag
    l : int
        Shift between consecutive windows, 1 <= l <= N
    grid : QGrid
        Moment orders
    t0 : int
        Series index of the first increment of window 1
    warmup : int
        zeta is emitted only for n > warmup
    forgetting : float
        Weight decay of past areas in A_bar; 1.0 keeps the plain mean over
        all previous windows
    """
    N: int = 1000
    T: int = 1
    l: int = 1
    grid: QGrid = field(default_factory=QGrid)
    t0: int = 0
    warmup: int = 1
    forgetting: float = 1.0

    def __post_init__(self):
        if self.N < MIN_INCREMENTS:
            raise ConfigError(f"window size N must be at least {MIN_INCREMENTS}, got {self.N}")
        if self.T < 1:
            raise ConfigError(f"lag T must be at least 1, got {self.T}")
        if not 1 <= self.l <= self.N:
            raise ConfigError(f"shift l must satisfy 1 <= l <= N={self.N}, got {self.l}")
        if self.t0 < 0:
            raise ConfigError(f"start index t0 must be nonnegative, got {self.t0}")
        if self.warmup < 1:
            raise ConfigError(f"warmup must be at least 1, got {self.warmup}")
        if not 0 < self.forgetting <= 1:
            raise ConfigError(f"forgetting factor must lie in (0, 1], got {self.forgetting}")

    @property
    def key(self) -> tuple:
        return (self.N, self.T, self.l)

    def window_start(self, n: int) -> int:
        return self.t0 + (n - 1) * self.l

    def fits(self, n: int, length: int) -> bool:
        return self.window_start(n) + self.N + self.T <= length

    def window_count(self, length: int) -> int:
        """Number of windows that fit in a series of the given length"""
        span = length - self.t0 - self.N - self.T
        if span < 0:
            raise WindowRangeError(
                f"no window fits: t0 + N + T = {self.t0 + self.N + self.T} exceeds series length {length}"
            )
        return span // self.l + 1


@dataclass(frozen=True, eq=False)
class WindowResult:
    """One row of the zeta trace"""
    n: int
    t_prime: int
    label: Optional[str]
    area: Optional[float]
    running_mean: Optional[float]
    zeta: Optional[float]
    degenerate: bool = False
    zero_mean: bool = False
    last_index: int = 0
    spectrum: Optional[Spectrum] = None


def map_index(n: int, config: AnalysisConfig, length: Optional[int] = None) -> int:
    """
    Series index t'_n = t0 + N + n*l of window n

    When ``length`` is given, a window that does not fit in the series is
    rejected.
    """
    if n < 1:
        raise ConfigError(f"window ordinal must be at least 1, got {n}")
    if length is not None and not config.fits(n, length):
        raise WindowRangeError(f"window {n} extends beyond series of length {length}")
    return config.t0 + config.N + n * config.l


def _spectrum_or_none(series: PriceSeries, start: int, config: AnalysisConfig) -> Optional[Spectrum]:
    try:
        return analyze_window(series, start, config)
    except DegenerateWindowError as exc:
        logger.debug("%s", exc)
        return None


def compute_spectra(series: PriceSeries, config: AnalysisConfig, workers: int = 1) -> List[Optional[Spectrum]]:
    """Spectra of every window in ordinal order, None for degenerate windows"""
    count = config.window_count(len(series))
    starts = [config.window_start(n) for n in range(1, count + 1)]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda start: _spectrum_or_none(series, start, config), starts))
    return [_spectrum_or_none(series, start, config) for start in starts]


def run(
    series: PriceSeries,
    config: AnalysisConfig,
    workers: int = 1,
    attach_spectra: bool = False,
) -> List[WindowResult]:
    """
    Slide the window along the series and emit zeta(n)

    Parameters:
    -----------
    series : PriceSeries
        Input series
    config : AnalysisConfig
        Window parameters
    workers : int
        Threads used for the per-window spectra; the output does not
        depend on it
    attach_spectra : bool
        Keep each window's Spectrum on its result

    Returns:
    --------
    results : List[WindowResult]
        Ascending in n. A_bar averages the non-degenerate windows before n;
        zeta is None for n <= warmup, for degenerate windows and when
        A_bar is zero.
    """
    spectra = compute_spectra(series, config, workers=workers)

    results = []
    weighted_sum = 0.0
    weight = 0.0
    zero_mean_windows = 0
    for n, spectrum in enumerate(spectra, start=1):
        t_prime = map_index(n, config)
        last_index = config.window_start(n) + config.N + config.T - 1
        running_mean = weighted_sum / weight if weight > 0 else None

        if spectrum is None:
            results.append(WindowResult(
                n=n, t_prime=t_prime, label=series.label_at(t_prime), area=None,
                running_mean=running_mean, zeta=None, degenerate=True, last_index=last_index,
            ))
            continue

        area = spectrum.area
        zeta = None
        zero_mean = False
        if n > config.warmup and running_mean is not None:
            if running_mean > 0:
                zeta = abs(area / running_mean - 1.0)
            else:
                zero_mean = True
                zero_mean_windows += 1

        results.append(WindowResult(
            n=n,
            t_prime=t_prime,
            label=series.label_at(t_prime),
            area=area,
            running_mean=running_mean,
            zeta=zeta,
            zero_mean=zero_mean,
            last_index=last_index,
            spectrum=spectrum if attach_spectra else None,
        ))
        weighted_sum = config.forgetting * weighted_sum + area
        weight = config.forgetting * weight + 1.0

    if weight == 0:
        raise NoWindowError(f"all {len(results)} windows of {series.name!r} are degenerate")
    if zero_mean_windows:
        logger.warning("%d windows have zero mean area; zeta undefined there", zero_mean_windows)
    logger.info(
        "N=%d T=%d l=%d: %d windows, %d degenerate",
        config.N, config.T, config.l, len(results), sum(r.degenerate for r in results),
    )
    return results


def areas(results: List[WindowResult]) -> np.ndarray:
    """Area column of a trace, NaN for degenerate windows"""
    return np.array([np.nan if r.area is None else r.area for r in results])
