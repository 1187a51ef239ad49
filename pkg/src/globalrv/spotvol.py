"""Temporally local spot-variance estimators used to normalise increments.

Each increment ``j`` is assigned the window ``I_{n,j}`` of ``2*kappa + 1``
consecutive increments centred on ``j`` and clamped at both ends of the
sample.  Inside the window either a rank-filtered realized variance (LGRV)
or a local minRV is computed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .numcore import filter_constants
from .pathdata import NO_TRUNCATION, SampledPath, TruncationConfig, k_mask

__all__ = [
    "SPOT_METHODS",
    "SpotVolSeries",
    "WindowConfig",
    "lgrv",
    "local_minrv",
    "spot_series",
    "window_indices",
    "window_starts",
]

SPOT_METHODS = ("lgrv", "local-minrv", "unit")
MINRV_FACTOR = math.pi / (math.pi - 2.0)
# guards floor(n * (1 - alpha)) against 0.8 * 2000 = 1599.9999... style rounding
_FLOOR_EPS = 1e-9


def rank_cutoff(m: int, alpha: float) -> int:
    """``floor(m * (1 - alpha))``, robust to binary rounding of ``alpha``."""
    return int(math.floor(m * (1.0 - alpha) + _FLOOR_EPS))


@dataclass(frozen=True)
class WindowConfig:
    """Half-width ``kappa`` of the local windows.

    Use :meth:`from_rule` for ``kappa = floor(B * n**c)``.
    """

    kappa: int
    rule_B: float | None = None
    rule_c: float | None = None

    def __post_init__(self):
        if int(self.kappa) != self.kappa or self.kappa < 1:
            raise ValueError(f"kappa must be a positive integer, got {self.kappa!r}")

    @classmethod
    def from_rule(cls, n: int, B: float = 10.0, c: float = 0.45) -> "WindowConfig":
        if not B > 0:
            raise ValueError("rule constant B must be positive")
        if not 0 < c < 1:
            raise ValueError("rule exponent c must lie in (0, 1)")
        return cls(int(math.floor(B * n ** c + _FLOOR_EPS)), B, c)

    @property
    def kbar(self) -> int:
        return 2 * self.kappa + 1

    def check(self, n: int) -> None:
        if self.kbar > n:
            raise ValueError(f"window 2*kappa+1 = {self.kbar} exceeds n = {n}")


@dataclass(frozen=True, eq=False)
class SpotVolSeries:
    """Spot-variance estimates ``S_{n,j-1}`` aligned with increments ``j = 1..n``."""

    values: np.ndarray
    method: str

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1:
            raise ValueError("spot series must be one-dimensional")
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise ValueError("spot variances must be finite and non-negative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.size

    @classmethod
    def unit(cls, n: int) -> "SpotVolSeries":
        return cls(np.ones(n), "unit")


def window_starts(n: int, cfg: WindowConfig) -> np.ndarray:
    """0-based start of the window for every increment (vectorised ``j_underline - 1``)."""
    cfg.check(n)
    j = np.arange(1, n + 1)
    start = np.clip(j - cfg.kappa, 1, n - 2 * cfg.kappa)
    return start - 1


def window_indices(n: int, j: int, cfg: WindowConfig) -> np.ndarray:
    """1-based increment indices of ``I_{n,j}``."""
    cfg.check(n)
    if not 1 <= j <= n:
        raise IndexError(f"increment index {j} outside 1..{n}")
    k = cfg.kappa
    if j <= k:
        lo = 1
    elif j <= n - k:
        lo = j - k
    else:
        lo = n - 2 * k
    return np.arange(lo, lo + 2 * k + 1)


def _check_alpha0(alpha0: float) -> None:
    if not 0.0 <= alpha0 < 1.0:
        raise ValueError(f"alpha0 must lie in [0, 1), got {alpha0!r}")


def _lgrv_windows(path: SampledPath, alpha0: float, cfg: WindowConfig,
                  trunc: TruncationConfig) -> np.ndarray:
    """LGRV for each distinct window start 0..n-kbar."""
    n, kbar = path.n, cfg.kbar
    keep = rank_cutoff(kbar, alpha0)
    absd = np.abs(path.increments)
    # Within a window the rank filter keeps the `keep` smallest |dX|; K is
    # monotone in |dX| so it can be applied after sorting.  Tied values carry
    # identical contributions, so stable tie-breaking does not change the sum.
    windows = sliding_window_view(absd, kbar)
    smallest = np.sort(windows, axis=1)[:, :keep]
    contrib = smallest * smallest
    if trunc.enabled:
        contrib = np.where(smallest <= trunc.k_threshold(n), contrib, 0.0)
    q = filter_constants(alpha0).q
    return n / (kbar * path.T) * contrib.sum(axis=1) / q


def lgrv(path: SampledPath, j: int, alpha0: float, cfg: WindowConfig,
         trunc: TruncationConfig = NO_TRUNCATION) -> float:
    """Local-global realized volatility for the window of increment ``j``.

    Ranks ``|dX_k|`` over ``k`` in ``I_{n,j}``, keeps ranks up to
    ``floor((1 - alpha0) * (2 kappa + 1))`` and returns
    ``n / ((2 kappa + 1) T) * q(alpha0)**-1 * sum(|dX_k|**2 K_k)`` over the kept ones.
    """
    _check_alpha0(alpha0)
    idx = window_indices(path.n, j, cfg) - 1
    d = np.abs(path.increments[idx])
    order = np.argsort(d, kind="stable")
    kept = order[: rank_cutoff(cfg.kbar, alpha0)]
    k = k_mask(path, trunc)[idx]
    total = float(np.sum(d[kept] ** 2 * k[kept]))
    return path.n / (cfg.kbar * path.T) * total / filter_constants(alpha0).q


def _minrv_windows(path: SampledPath, cfg: WindowConfig) -> np.ndarray:
    n, kbar = path.n, cfg.kbar
    absd = np.abs(path.increments)
    pair = np.minimum(absd[:-1], absd[1:]) ** 2  # pair k = (k, k+1), 0-based k = 0..n-2
    csum = np.concatenate(([0.0], np.cumsum(pair)))
    starts = np.arange(n - kbar + 1)
    stops = np.minimum(starts + kbar, n - 1)
    npairs = stops - starts
    total = csum[stops] - csum[starts]
    return MINRV_FACTOR * n / (kbar * path.T) * (kbar / npairs) * total


def local_minrv(path: SampledPath, j: int, cfg: WindowConfig) -> float:
    """Local minRV on the window of increment ``j``.

    The pair ``(n, n+1)`` does not exist at the right edge; it is dropped and
    the sum rescaled by ``kbar / pairs``.
    """
    idx = window_indices(path.n, j, cfg) - 1
    idx = idx[idx + 1 < path.n]
    absd = np.abs(path.increments)
    total = float(np.sum(np.minimum(absd[idx], absd[idx + 1]) ** 2))
    return MINRV_FACTOR * path.n / (cfg.kbar * path.T) * (cfg.kbar / idx.size) * total


def spot_series(path: SampledPath, method: str = "lgrv", alpha0: float = 0.2,
                cfg: WindowConfig | None = None,
                trunc: TruncationConfig = NO_TRUNCATION) -> SpotVolSeries:
    """Spot variance for every increment.

    ``cfg`` defaults to ``kappa = floor(10 * n**0.45)``.  ``method="unit"``
    returns all ones (constant-volatility mode).
    """
    if method not in SPOT_METHODS:
        raise ValueError(f"unknown spot method {method!r}; expected one of {SPOT_METHODS}")
    if method == "unit":
        return SpotVolSeries.unit(path.n)
    if cfg is None:
        cfg = WindowConfig.from_rule(path.n)
    cfg.check(path.n)
    if method == "lgrv":
        _check_alpha0(alpha0)
        per_window = _lgrv_windows(path, alpha0, cfg, trunc)
    else:
        per_window = _minrv_windows(path, cfg)
    return SpotVolSeries(per_window[window_starts(path.n, cfg)], method)
