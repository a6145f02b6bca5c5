"""
Multifractal spectrum of one analysis window
Measure, partition function Z(q), tau(q), D_q, analogous specific heat C(q)
and its area A
"""

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import logsumexp

from .errors import ConfigError, DegenerateWindowError, PartitionOverflowError, WindowRangeError
from .ingest import PriceSeries

if TYPE_CHECKING:
    from .engine import AnalysisConfig

logger = logging.getLogger(__name__)

MIN_INCREMENTS = 16
GRID_DECIMALS = 12
AREA_JITTER = 1e-9
LOG_FLOAT_MAX = float(np.log(np.finfo(float).max))


@dataclass(frozen=True)
class QGrid:
    """
    Moment orders q_i = q_min + i*dq

    Parameters:
    -----------
    q_min, q_max : float
        Grid ends, q_min < q_max
    dq : float
        Step; (q_max - q_min)/dq must be an integer and the grid must hold
        at least 5 points
    """
    q_min: float = -5.0
    q_max: float = 5.0
    dq: float = 0.1

    def __post_init__(self):
        if not (np.isfinite(self.q_min) and np.isfinite(self.q_max) and np.isfinite(self.dq)):
            raise ConfigError("q-grid bounds must be finite")
        if self.dq <= 0:
            raise ConfigError(f"dq must be positive, got {self.dq}")
        if self.q_min >= self.q_max:
            raise ConfigError(f"q_min must be below q_max, got [{self.q_min}, {self.q_max}]")
        steps = (self.q_max - self.q_min) / self.dq
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ConfigError(f"(q_max - q_min)/dq = {steps:g} is not an integer")
        if round(steps) + 1 < 5:
            raise ConfigError(f"q-grid needs at least 5 points, got {round(steps) + 1}")

    @property
    def count(self) -> int:
        return int(round((self.q_max - self.q_min) / self.dq)) + 1

    @property
    def points(self) -> np.ndarray:
        # rounding puts integer orders such as q=1 exactly on the grid
        return np.round(self.q_min + np.arange(self.count) * self.dq, GRID_DECIMALS)

    @property
    def interior(self) -> np.ndarray:
        return self.points[1:-1]

    def index_of(self, q: float) -> Optional[int]:
        hits = np.flatnonzero(np.isclose(self.points, q, rtol=0.0, atol=1e-12))
        return int(hits[0]) if hits.size else None


@dataclass(frozen=True, eq=False)
class IncrementWindow:
    """Nonzero increment magnitudes |x(t+T) - x(t)| of one window"""
    magnitudes: np.ndarray
    lag_T: int = 1
    dropped_zero_count: int = 0
    start_index: int = 0

    def __post_init__(self):
        magnitudes = np.array(self.magnitudes, dtype=float)
        if magnitudes.ndim != 1 or magnitudes.size == 0:
            raise DegenerateWindowError(self.start_index, 0, 1)
        if not np.all(magnitudes > 0) or not np.all(np.isfinite(magnitudes)):
            raise ConfigError("increment magnitudes must be positive and finite")
        object.__setattr__(self, "magnitudes", magnitudes)

    @property
    def n_effective(self) -> int:
        return int(self.magnitudes.size)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """
    Thermodynamic quantities of one window on a q-grid

    ``c`` lives on the interior grid points and is stored before clipping;
    ``area`` integrates the clipped curve.
    """
    grid: QGrid
    z: np.ndarray
    log_z: np.ndarray
    tau: np.ndarray
    dq_dim: np.ndarray
    c: np.ndarray
    area: float
    n_effective: int
    window_start: int = 0
    dropped_zero_count: int = 0

    @property
    def q(self) -> np.ndarray:
        return self.grid.points

    @property
    def q_interior(self) -> np.ndarray:
        return self.grid.interior


def build_increments(
    series: PriceSeries,
    window_start: int,
    N: int,
    T: int,
    min_increments: int = MIN_INCREMENTS,
) -> IncrementWindow:
    """
    Increment magnitudes of the window starting at ``window_start``

    Parameters:
    -----------
    series : PriceSeries
        Full series x
    window_start : int
        Index of the first increment
    N : int
        Number of increments; the window consumes N + T values
    T : int
        Lag
    min_increments : int
        Fewest nonzero increments a usable window may keep

    Returns:
    --------
    window : IncrementWindow
        Zero increments are dropped and counted
    """
    if N < 1 or T < 1:
        raise ConfigError(f"window size and lag must be positive, got N={N}, T={T}")
    if window_start < 0 or window_start + N + T > len(series):
        raise WindowRangeError(
            f"window [{window_start}, {window_start + N + T}) exceeds series of length {len(series)}"
        )

    segment = series.values[window_start:window_start + N + T]
    magnitudes = np.abs(segment[T:] - segment[:-T])
    nonzero = magnitudes > 0
    survivors = magnitudes[nonzero]
    if survivors.size < min_increments:
        raise DegenerateWindowError(window_start, int(survivors.size), min_increments)

    return IncrementWindow(
        magnitudes=survivors,
        lag_T=T,
        dropped_zero_count=int(N - survivors.size),
        start_index=window_start,
    )


def measure(window: IncrementWindow) -> np.ndarray:
    """Normalized measure mu_t = |dx_t| / sum |dx_t|"""
    magnitudes = window.magnitudes
    return magnitudes / magnitudes.sum()


def log_partition_function(mu: np.ndarray, grid: QGrid) -> np.ndarray:
    """ln Z(q_i), accumulated in the log domain"""
    log_mu = np.log(np.asarray(mu, dtype=float))
    return logsumexp(np.outer(grid.points, log_mu), axis=1)


def partition_function(mu: np.ndarray, grid: QGrid) -> np.ndarray:
    """
    Z(q_i) = sum_t mu_t ** q_i

    Raises PartitionOverflowError naming the first q whose Z leaves the
    floating point range.
    """
    log_z = log_partition_function(mu, grid)
    overflow = log_z >= LOG_FLOAT_MAX
    if overflow.any():
        raise PartitionOverflowError(float(grid.points[np.argmax(overflow)]))
    return np.exp(log_z)


def tau_spectrum(
    z: np.ndarray,
    n_effective: int,
    grid: QGrid,
    mu: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Single-scale tau(q) = -ln Z / ln N and D_q = tau / (q - 1)

    D_1 is the information dimension -sum(mu ln mu)/ln N when the measure is
    supplied, otherwise the central slope of tau at q=1.
    """
    if n_effective < 2:
        raise ConfigError(f"need at least 2 measure elements, got {n_effective}")
    log_n = np.log(n_effective)
    tau = -np.log(np.asarray(z, dtype=float)) / log_n

    q = grid.points
    with np.errstate(divide="ignore", invalid="ignore"):
        dims = tau / (q - 1.0)
    one = grid.index_of(1.0)
    if one is not None:
        if mu is not None:
            mu = np.asarray(mu, dtype=float)
            dims[one] = float(-np.sum(mu * np.log(mu)) / log_n)
        elif 0 < one < q.size - 1:
            dims[one] = (tau[one + 1] - tau[one - 1]) / (2 * grid.dq)
        else:
            dims[one] = np.nan
    return tau, dims


def specific_heat(tau: np.ndarray, grid: QGrid) -> np.ndarray:
    """C(q_i) = -(tau_{i+1} - 2 tau_i + tau_{i-1}) / dq**2 on interior points"""
    tau = np.asarray(tau, dtype=float)
    if tau.size != grid.count:
        raise ConfigError(f"tau has {tau.size} points, grid has {grid.count}")
    return -(tau[2:] - 2.0 * tau[1:-1] + tau[:-2]) / grid.dq ** 2


def spectrum_area(c: np.ndarray, grid: QGrid, jitter: float = AREA_JITTER) -> float:
    """
    Trapezoidal area under max(C, 0) over the interior grid

    Values at or below ``jitter`` count as zero.
    """
    c = np.asarray(c, dtype=float)
    if c.size < 3 or c.size != grid.count - 2:
        raise ConfigError(f"C needs {grid.count - 2} >= 3 interior points, got {c.size}")
    clipped = np.where(c > jitter, c, 0.0)
    return float(trapezoid(clipped, grid.interior))


def analyze_window(series: PriceSeries, window_start: int, config: "AnalysisConfig") -> Spectrum:
    """Full spectrum of the window that starts at ``window_start``"""
    window = build_increments(series, window_start, config.N, config.T)
    mu = measure(window)
    grid = config.grid

    z = partition_function(mu, grid)
    tau, dims = tau_spectrum(z, window.n_effective, grid, mu=mu)
    c = specific_heat(tau, grid)
    area = spectrum_area(c, grid)
    logger.debug("window %d: N_eff=%d area=%.6g", window_start, window.n_effective, area)

    return Spectrum(
        grid=grid,
        z=z,
        log_z=np.log(z),
        tau=tau,
        dq_dim=dims,
        c=c,
        area=area,
        n_effective=window.n_effective,
        window_start=window_start,
        dropped_zero_count=window.dropped_zero_count,
    )
