"""
Exception hierarchy for the AVR pipeline.

Library code raises these; the command-line frontend maps ``exit_code``
to the process status.
"""

from typing import Optional


class AVRError(Exception):
    """Base class for all pipeline errors"""

    exit_code = 1


class SeriesParseError(AVRError):
    """Input series could not be parsed or failed validation"""

    exit_code = 2

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(AVRError):
    """Invalid analysis configuration, grid, policy or synthetic spec"""

    exit_code = 3


class DegenerateWindowError(AVRError):
    """Too few nonzero increments survive in a window"""

    exit_code = 4

    def __init__(self, window_start: int, surviving: int, required: int):
        super().__init__(
            f"degenerate window at index {window_start}: "
            f"{surviving} nonzero increments, need {required}"
        )
        self.window_start = window_start
        self.surviving = surviving


class PartitionOverflowError(AVRError):
    """Z(q) exceeds the floating point range"""

    exit_code = 4

    def __init__(self, q: float):
        super().__init__(f"partition function overflows at q={q:g}")
        self.q = q


class WindowRangeError(ConfigError):
    """A window or mapped index falls outside the series"""


class NoWindowError(AVRError):
    """The engine produced no usable window"""

    exit_code = 4


class SweepError(ConfigError):
    """Every sweep configuration was skipped"""
