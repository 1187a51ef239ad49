"""Equidistant sampled paths, CSV I/O and the increment truncation indicators."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

__all__ = [
    "FormatError",
    "SampledPath",
    "TruncationConfig",
    "indicator_h",
    "indicator_k",
    "k_mask",
    "h_mask",
    "load_csv",
    "write_csv",
]

GRID_RTOL = 1e-8


class FormatError(ValueError):
    """Input data that cannot be turned into an equidistant path."""


@dataclass(frozen=True, eq=False)
class SampledPath:
    """Observations ``X_{t_0}, ..., X_{t_n}`` on ``t_j = j T / n``."""

    values: np.ndarray
    T: float = 1.0
    increments: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 3:
            raise ValueError("a path needs at least 3 observations (n >= 2 increments)")
        if not np.all(np.isfinite(vals)):
            raise ValueError("path values must be finite")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError(f"horizon must be positive, got {self.T!r}")
        vals.setflags(write=False)
        incs = np.diff(vals)
        incs.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "increments", incs)

    @property
    def n(self) -> int:
        return self.values.size - 1

    @property
    def h(self) -> float:
        return self.T / self.n

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n + 1) * self.h

    def scaled(self, lam: float) -> "SampledPath":
        return SampledPath(lam * self.values, self.T)

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class TruncationConfig:
    """Constants of the large-increment cut-offs.

    ``K`` keeps ``|dX| <= cK * n**-0.25``; ``H`` keeps
    ``|dX| < B0 * n**(-0.25 - delta0)``.  With ``enabled=False`` both are
    identically one.
    """

    cK: float = 1.0
    B0: float = 5.0
    delta0: float = 0.1
    enabled: bool = True

    def __post_init__(self):
        if not self.cK > 0:
            raise ValueError("cK must be positive")
        if not self.B0 > 0:
            raise ValueError("B0 must be positive")
        if not 0 < self.delta0 < 0.25:
            raise ValueError("delta0 must lie in (0, 1/4)")

    def k_threshold(self, n: int) -> float:
        return self.cK * n ** -0.25

    def h_threshold(self, n: int) -> float:
        return self.B0 * n ** (-0.25 - self.delta0)


NO_TRUNCATION = TruncationConfig(enabled=False)


def k_mask(path: SampledPath, cfg: TruncationConfig) -> np.ndarray:
    """K indicator for every increment as a float array of 0/1."""
    if not cfg.enabled:
        return np.ones(path.n)
    return (np.abs(path.increments) <= cfg.k_threshold(path.n)).astype(float)


def h_mask(path: SampledPath, cfg: TruncationConfig) -> np.ndarray:
    if not cfg.enabled:
        return np.ones(path.n)
    return (np.abs(path.increments) < cfg.h_threshold(path.n)).astype(float)


def _check_index(path: SampledPath, j: int) -> None:
    if not 1 <= j <= path.n:
        raise IndexError(f"increment index {j} outside 1..{path.n}")


def indicator_k(path: SampledPath, j: int, cfg: TruncationConfig) -> int:
    _check_index(path, j)
    if not cfg.enabled:
        return 1
    return int(abs(path.increments[j - 1]) <= cfg.k_threshold(path.n))


def indicator_h(path: SampledPath, j: int, cfg: TruncationConfig) -> int:
    _check_index(path, j)
    if not cfg.enabled:
        return 1
    return int(abs(path.increments[j - 1]) < cfg.h_threshold(path.n))


def _read_rows(source) -> Iterable[dict]:
    if isinstance(source, (bytes, bytearray)):
        source = io.StringIO(source.decode("utf-8"))
    elif isinstance(source, str):
        source = io.StringIO(source)
    elif isinstance(source, io.BufferedIOBase) or "b" in getattr(source, "mode", ""):
        source = io.TextIOWrapper(source, encoding="utf-8")
    return csv.DictReader(line for line in source if not line.startswith("#"))


def load_csv(source, time_column: str = "t", value_column: str = "x") -> SampledPath:
    """Read a path from CSV text, bytes or a file object.

    Times are rebased to start at zero and must form an equidistant,
    strictly increasing grid (relative tolerance 1e-8 on the spacing).
    Lines beginning with ``#`` are skipped.
    """
    reader = _read_rows(source)
    if reader.fieldnames is None:
        raise FormatError("missing header row")
    for col in (time_column, value_column):
        if col not in reader.fieldnames:
            raise FormatError(f"column {col!r} not found in header {reader.fieldnames}")
    times, values = [], []
    for i, row in enumerate(reader, start=1):
        try:
            t = float(row[time_column])
            x = float(row[value_column])
        except (TypeError, ValueError):
            raise FormatError(f"unparsable cell in data row {i}") from None
        if not (math.isfinite(t) and math.isfinite(x)):
            raise FormatError(f"non-finite cell in data row {i}")
        times.append(t)
        values.append(x)
    if len(values) < 3:
        raise FormatError(f"need at least 3 rows, got {len(values)}")
    t = np.asarray(times)
    dt = np.diff(t)
    if np.any(dt <= 0):
        bad = int(np.argmax(dt <= 0)) + 2
        raise FormatError(f"time is not strictly increasing at data row {bad}")
    T = t[-1] - t[0]
    h = T / (len(t) - 1)
    if np.any(np.abs(dt - h) > GRID_RTOL * h):
        bad = int(np.argmax(np.abs(dt - h) > GRID_RTOL * h)) + 2
        raise FormatError(f"time grid is not equidistant (first offending row {bad})")
    return SampledPath(np.asarray(values), T)


def write_csv(path: SampledPath, dest: IO[str], time_column: str = "t",
              value_column: str = "x", comment: str | None = None) -> None:
    """Write ``path`` so that :func:`load_csv` reproduces it exactly (repr floats)."""
    if comment:
        for line in comment.splitlines():
            dest.write(f"# {line}\n")
    dest.write(f"{time_column},{value_column}\n")
    for t, x in zip(path.times, path.values):
        dest.write(f"{float(t)!r},{float(x)!r}\n")
