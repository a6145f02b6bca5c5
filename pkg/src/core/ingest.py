"""
Series ingestion and synthetic series generation
Parses closing-value files, validates them and builds moment-matched noise
"""

import io
import logging
import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import BinaryIO, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .errors import ConfigError, SeriesParseError

logger = logging.getLogger(__name__)

Source = Union[str, bytes, os.PathLike, BinaryIO]

CSV_HEADER = ("date", "close")
NAN_TOKENS = {"nan", "+nan", "-nan"}
MAX_SEED = 2 ** 64
DEFAULT_DECIMALS = 2
MAX_DECIMALS = 12


class SeriesFormat(str, Enum):
    CSV_TWO_COLUMN = "csv_two_column"
    PLAIN_VALUES = "plain_values"


class SyntheticKind(str, Enum):
    WHITE_NOISE = "white_noise"
    WHITE_NOISE_WITH_CRASH = "white_noise_with_crash"
    RANDOM_WALK = "random_walk"


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """
    Univariate series of closing values x(t)

    Parameters:
    -----------
    values : Sequence[float]
        Finite closing values in time order, at least two
    labels : Sequence[Optional[str]]
        ISO-8601 date labels, one per value, or empty when the series is
        unlabelled. Present labels must be strictly increasing.
    name : str
        Free-form identifier
    """
    values: np.ndarray
    labels: Tuple[Optional[str], ...] = ()
    name: str = "series"

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1:
            raise SeriesParseError("series values must be one-dimensional")
        if values.size < 2:
            raise SeriesParseError(f"series needs at least 2 values, got {values.size}")
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise SeriesParseError(f"non-finite value at position {bad}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

        labels = tuple(self.labels)
        if labels and all(label is None for label in labels):
            labels = ()
        if labels:
            if len(labels) != values.size:
                raise SeriesParseError(
                    f"{len(labels)} labels for {values.size} values"
                )
            previous = None
            for position, label in enumerate(labels):
                if label is None:
                    continue
                if previous is not None and label <= previous:
                    raise SeriesParseError(
                        f"dates not strictly increasing at position {position}: "
                        f"{label} after {previous}"
                    )
                previous = label
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return int(self.values.size)

    def label_at(self, index: int) -> Optional[str]:
        """Date label at a series index, None when unlabelled or past the end"""
        if not self.labels or index < 0 or index >= len(self.labels):
            return None
        return self.labels[index]

    def index_of(self, label: str) -> int:
        """Series index of a date label"""
        try:
            return self.labels.index(label)
        except ValueError:
            raise ConfigError(f"date {label!r} not found in series {self.name!r}")

    def transformed(self, scale: float, offset: float) -> "PriceSeries":
        """Affine copy a*x + b, keeping labels"""
        return PriceSeries(scale * self.values + offset, self.labels, self.name)


@dataclass(frozen=True)
class SyntheticSpec:
    """
    Parameters of a seeded synthetic series

    Parameters:
    -----------
    kind : SyntheticKind
        white_noise, white_noise_with_crash, or random_walk (steps drawn
        from the normal distribution, starting at ``origin``)
    length : int
        Number of values
    mean, variance : float
        Moments of the normal draws
    seed : int
        Seed of the numpy generator, 0 <= seed < 2**64
    crash_index, crash_magnitude :
        Persistent additive level shift applied from crash_index on,
        present iff kind is white_noise_with_crash
    origin : float
        First value of a random walk
    decimals : Optional[int]
        Values are rounded to this many decimal places, like quoted
        prices; None keeps the raw draws
    """
    kind: SyntheticKind = SyntheticKind.WHITE_NOISE
    length: int = 5000
    mean: float = 0.0
    variance: float = 1.0
    seed: int = 0
    crash_index: Optional[int] = None
    crash_magnitude: Optional[float] = None
    origin: float = 0.0
    decimals: Optional[int] = DEFAULT_DECIMALS

    def __post_init__(self):
        try:
            kind = SyntheticKind(self.kind)
        except ValueError:
            raise ConfigError(f"unknown synthetic kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.length < 2:
            raise ConfigError(f"synthetic length must be at least 2, got {self.length}")
        if not np.isfinite(self.mean) or not np.isfinite(self.variance):
            raise ConfigError("synthetic mean and variance must be finite")
        if self.variance < 0:
            raise ConfigError(f"variance must be nonnegative, got {self.variance}")
        if not 0 <= self.seed < MAX_SEED:
            raise ConfigError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        if self.decimals is not None and not 0 <= self.decimals <= MAX_DECIMALS:
            raise ConfigError(f"decimals must lie in [0, {MAX_DECIMALS}], got {self.decimals}")

        has_crash = self.crash_index is not None or self.crash_magnitude is not None
        if kind is SyntheticKind.WHITE_NOISE_WITH_CRASH:
            if self.crash_index is None or self.crash_magnitude is None:
                raise ConfigError("crash kind needs crash_index and crash_magnitude")
            if not 0 < self.crash_index < self.length:
                raise ConfigError(
                    f"crash_index must lie in (0, {self.length}), got {self.crash_index}"
                )
        elif has_crash:
            raise ConfigError(f"crash fields are only valid for {SyntheticKind.WHITE_NOISE_WITH_CRASH.value}")

    @property
    def std(self) -> float:
        return float(np.sqrt(self.variance))


def _read_text(source: Source) -> str:
    if isinstance(source, (Path, os.PathLike)):
        with open(source, "rb") as handle:
            raw = handle.read()
    elif isinstance(source, bytes):
        raw = source
    elif isinstance(source, str):
        return source
    else:
        raw = source.read()
        if isinstance(raw, str):
            return raw
    try:
        return raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise SeriesParseError(f"input is not UTF-8: {exc}")


def _parse_csv(text: str, name: str) -> PriceSeries:
    try:
        frame = pd.read_csv(
            io.StringIO(text),
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
            skipinitialspace=True,
        )
    except pd.errors.EmptyDataError:
        raise SeriesParseError("empty input", line=1)
    except pd.errors.ParserError as exc:
        message = str(exc)
        line = None
        marker = " line "
        if marker in message:
            digits = message.split(marker, 1)[1].split(",", 1)[0].strip()
            if digits.isdigit():
                line = int(digits)
        raise SeriesParseError(f"malformed row ({message.strip()})", line=line)

    header = tuple(str(column).strip().lower() for column in frame.columns)
    if header != CSV_HEADER:
        raise SeriesParseError(f"expected header 'date,close', got {','.join(map(str, frame.columns))!r}", line=1)

    frame = frame.fillna("")
    frame["line"] = frame.index + 2
    dates = frame["date"].str.strip()
    closes = frame["close"].str.strip()
    blank = (dates == "") & (closes == "")
    frame, dates, closes = frame[~blank], dates[~blank], closes[~blank]

    missing = closes == ""
    if missing.any():
        raise SeriesParseError("missing close value", line=int(frame["line"][missing].iloc[0]))

    numeric = pd.to_numeric(closes, errors="coerce")
    malformed = numeric.isna() & ~closes.str.lower().isin(NAN_TOKENS)
    if malformed.any():
        first = malformed.idxmax()
        raise SeriesParseError(
            f"close value {closes[first]!r} is not a number", line=int(frame["line"][first])
        )

    values = closes.astype(float).to_numpy()
    finite = np.isfinite(values)
    if not finite.all():
        position = int(np.flatnonzero(~finite)[0])
        raise SeriesParseError("non-finite close value", line=int(frame["line"].iloc[position]))

    labels = [date if date else None for date in dates]
    previous = None
    for line, label in zip(frame["line"], labels):
        if label is None:
            continue
        if previous is not None and label <= previous:
            raise SeriesParseError(f"date {label} does not follow {previous}", line=int(line))
        previous = label

    if values.size < 2:
        raise SeriesParseError(f"series needs at least 2 values, got {values.size}")
    return PriceSeries(values, tuple(labels), name)


def _parse_plain(text: str, name: str) -> PriceSeries:
    values = []
    for line, raw in enumerate(text.splitlines(), start=1):
        token = raw.strip()
        if not token or token.startswith("#"):
            continue
        try:
            value = float(token)
        except ValueError:
            raise SeriesParseError(f"value {token!r} is not a number", line=line)
        if not np.isfinite(value):
            raise SeriesParseError("non-finite value", line=line)
        values.append(value)
    if len(values) < 2:
        raise SeriesParseError(f"series needs at least 2 values, got {len(values)}")
    return PriceSeries(np.array(values), (), name)


def parse_series(
    source: Source,
    format: Union[str, SeriesFormat] = SeriesFormat.CSV_TWO_COLUMN,
    name: Optional[str] = None,
) -> PriceSeries:
    """
    Parse and validate a closing-value series

    Parameters:
    -----------
    source : str, bytes, path or binary stream
        A ``str`` is taken as file content; paths are opened
    format : SeriesFormat
        csv_two_column (header ``date,close``) or plain_values (one number
        per line, ``#`` comments ignored)
    name : str
        Series identifier, defaults to the file stem

    Returns:
    --------
    series : PriceSeries
    """
    try:
        series_format = SeriesFormat(format)
    except ValueError:
        raise ConfigError(f"unknown series format {format!r}")
    if name is None:
        name = Path(source).stem if isinstance(source, (Path, os.PathLike)) else "series"

    text = _read_text(source)
    if series_format is SeriesFormat.CSV_TWO_COLUMN:
        series = _parse_csv(text, name)
    else:
        series = _parse_plain(text, name)
    logger.info("parsed %d values from %s (%s)", len(series), name, series_format.value)
    return series


def serialize_series(series: PriceSeries, format: Union[str, SeriesFormat] = SeriesFormat.CSV_TWO_COLUMN) -> str:
    """Text form of a series that parse_series reads back unchanged"""
    series_format = SeriesFormat(format)
    if series_format is SeriesFormat.PLAIN_VALUES:
        return "".join(f"{float(v)!r}\n" for v in series.values)

    labels = series.labels or (None,) * len(series)
    rows = [",".join(CSV_HEADER)]
    rows.extend(f"{label or ''},{float(v)!r}" for label, v in zip(labels, series.values))
    return "\n".join(rows) + "\n"


def read_table(source: Source) -> pd.DataFrame:
    """Read a columnar table written by the command-line frontend"""
    text = _read_text(source)
    try:
        return pd.read_csv(io.StringIO(text), float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise SeriesParseError(f"malformed table: {exc}")


def _quantize(values: np.ndarray, decimals: Optional[int]) -> np.ndarray:
    return values if decimals is None else np.round(values, decimals)


def series_decimals(values: Sequence[float], limit: int = 8) -> Optional[int]:
    """
    Fewest decimal places that represent every value, None beyond ``limit``
    """
    values = np.asarray(values, dtype=float)
    for decimals in range(limit + 1):
        scaled = values * 10.0 ** decimals
        if np.allclose(scaled, np.round(scaled), rtol=1e-12, atol=1e-6):
            return decimals
    return None


def generate_synthetic(spec: SyntheticSpec) -> PriceSeries:
    """
    Draw a seeded synthetic series

    The same spec always yields bit-identical values. The crash shift is
    added after rounding, so the tail equals the plain noise plus the
    magnitude.
    """
    rng = np.random.default_rng(spec.seed)

    if spec.kind is SyntheticKind.RANDOM_WALK:
        steps = spec.mean + spec.std * rng.standard_normal(spec.length - 1)
        values = _quantize(spec.origin + np.concatenate(([0.0], np.cumsum(steps))), spec.decimals)
    else:
        values = _quantize(spec.mean + spec.std * rng.standard_normal(spec.length), spec.decimals)
        if spec.kind is SyntheticKind.WHITE_NOISE_WITH_CRASH:
            values[spec.crash_index:] += spec.crash_magnitude

    return PriceSeries(values, (), f"{spec.kind.value}-seed{spec.seed}")


def match_moments(
    series: PriceSeries,
    seed: int = 0,
    length: Optional[int] = None,
    basis: str = "levels",
) -> SyntheticSpec:
    """
    Noise spec with the sample moments of a series

    Parameters:
    -----------
    series : PriceSeries
        Reference series
    seed : int
        Seed of the returned spec
    length : int
        Length of the returned spec, defaults to the series length
    basis : str
        "levels" matches mean/variance of the values (white noise);
        "increments" matches the first differences (random walk from the
        first value)

    Returns:
    --------
    spec : SyntheticSpec
        Variance uses denominator L; values are rounded to the decimal
        places of the reference series
    """
    length = len(series) if length is None else int(length)
    decimals = series_decimals(series.values)
    if basis == "levels":
        return SyntheticSpec(
            kind=SyntheticKind.WHITE_NOISE,
            length=length,
            mean=float(np.mean(series.values)),
            variance=float(np.var(series.values)),
            seed=seed,
            decimals=decimals,
        )
    if basis == "increments":
        steps = np.diff(series.values)
        return SyntheticSpec(
            kind=SyntheticKind.RANDOM_WALK,
            length=length,
            mean=float(np.mean(steps)),
            variance=float(np.var(steps)),
            seed=seed,
            origin=float(series.values[0]),
            decimals=decimals,
        )
    raise ConfigError(f"unknown moment basis {basis!r}")


def as_series(values: Sequence[float], labels: Sequence[Optional[str]] = (), name: str = "series") -> PriceSeries:
    """Build a PriceSeries from in-memory values"""
    return PriceSeries(np.asarray(values, dtype=float), tuple(labels), name)
