"""Integrated-variance estimators: baselines and global-filter estimators.

The global estimators rank the normalised increments ``V_j = |dX_j| / sqrt(S_j)``
over the whole sample and treat the top ones as jumps.  Two flavours exist:
a fixed cut-off ratio ``alpha`` (``grv_fixed``/``wgrv_fixed``) and a moving
threshold ``s_n = n - floor(B n**delta1)`` (``grv_moving``/``wgrv_moving``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numcore import filter_constants
from .pathdata import NO_TRUNCATION, SampledPath, TruncationConfig, h_mask, k_mask
from .spotvol import MINRV_FACTOR, SpotVolSeries, rank_cutoff

__all__ = [
    "Estimate",
    "FixedAlphaConfig",
    "MovingThresholdConfig",
    "bv",
    "error_ratio",
    "grv_constant_vol",
    "grv_fixed",
    "grv_moving",
    "minrv",
    "rv",
    "studentize",
    "trv",
    "wgrv_fixed",
    "wgrv_moving",
]


@dataclass(frozen=True, eq=False)
class Estimate:
    value: float
    label: str
    kept_count: int
    filtered_indices: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class FixedAlphaConfig:
    alpha: float
    spot: SpotVolSeries
    trunc: TruncationConfig = NO_TRUNCATION

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"cut-off ratio must lie in (0, 1), got {self.alpha!r}")


@dataclass(frozen=True)
class MovingThresholdConfig:
    """Moving threshold ``s_n = n - floor(B n**delta1)``.

    ``qn=None`` selects the normalising constant from ``alpha_n = floor(B n**delta1) / n``
    when a non-unit spot series is supplied: ``q(alpha_n)`` for GRV and
    ``w(alpha_n)`` for WGRV.  With a unit spot series it is 1.
    """

    spot: SpotVolSeries
    B: float = 10.0
    delta1: float = 0.45
    qn: float | None = None
    trunc: TruncationConfig = NO_TRUNCATION

    def __post_init__(self):
        if not self.B > 0:
            raise ValueError("B must be positive")
        if not 0.0 < self.delta1 < 0.5:
            raise ValueError("delta1 must lie in (0, 1/2)")
        if self.qn is not None and not self.qn > 0:
            raise ValueError("qn must be positive")

    def cut_count(self, n: int) -> int:
        return int(math.floor(self.B * n ** self.delta1 + 1e-9))

    def alpha_n(self, n: int) -> float:
        return self.cut_count(n) / n

    def resolved_qn(self, n: int, winsorized: bool = False) -> float:
        if self.qn is not None:
            return float(self.qn)
        if self.spot.method == "unit":
            return 1.0
        consts = filter_constants(self.alpha_n(n))
        return consts.w if winsorized else consts.q


# -- baselines ---------------------------------------------------------------

def rv(path: SampledPath) -> Estimate:
    d = path.increments
    return Estimate(float(np.dot(d, d)), "rv", path.n)


def trv(path: SampledPath, rho: float) -> Estimate:
    """Threshold realized variance with the deterministic cut-off ``n**-rho``."""
    if not 0.0 < rho < 0.5:
        raise ValueError(f"rho must lie in (0, 1/2), got {rho!r}")
    d = path.increments
    keep = np.abs(d) <= path.n ** -rho
    return Estimate(float(np.sum(d[keep] ** 2)), f"trv[{rho:.2f}]", int(keep.sum()),
                    np.flatnonzero(~keep) + 1)


def bv(path: SampledPath) -> Estimate:
    a = np.abs(path.increments)
    return Estimate(float(math.pi / 2.0 * np.dot(a[:-1], a[1:])), "bv", path.n)


def minrv(path: SampledPath) -> Estimate:
    a = np.abs(path.increments)
    m = np.minimum(a[:-1], a[1:])
    return Estimate(float(MINRV_FACTOR * np.dot(m, m)), "mrv", path.n)


# -- global filters ----------------------------------------------------------

def _scaled_increments(path: SampledPath, spot: SpotVolSeries) -> np.ndarray:
    if len(spot) != path.n:
        raise ValueError(f"spot series has length {len(spot)}, path has {path.n} increments")
    s = spot.values
    # pseudo-inverse: a zero spot estimate maps the increment to V = 0
    inv_sqrt = np.zeros_like(s)
    pos = s > 0
    inv_sqrt[pos] = 1.0 / np.sqrt(s[pos])
    return np.abs(path.increments) * inv_sqrt


def _global_filter(v: np.ndarray, s_n: int) -> tuple[np.ndarray, float]:
    """Mask of ``V_j < V_(s_n)`` and the threshold order statistic itself."""
    if s_n < 2:
        raise ValueError(f"threshold rank s_n = {s_n} must be at least 2")
    threshold = float(np.partition(v, s_n - 1)[s_n - 1])
    return v < threshold, threshold


def _fixed_filter(path: SampledPath, cfg: FixedAlphaConfig):
    v = _scaled_increments(path, cfg.spot)
    kept, threshold = _global_filter(v, rank_cutoff(path.n, cfg.alpha))
    return kept, threshold


def grv_fixed(path: SampledPath, cfg: FixedAlphaConfig, label: str | None = None) -> Estimate:
    """Global realized volatility with a fixed cut-off ratio.

    Sums ``|dX_j|**2 K_j`` over ``V_j < V_(s_n)``, ``s_n = floor(n (1 - alpha))``,
    and divides by ``q(alpha)``.
    """
    kept, _ = _fixed_filter(path, cfg)
    d = path.increments
    k = k_mask(path, cfg.trunc)
    total = float(np.sum(d[kept] ** 2 * k[kept]))
    return Estimate(total / filter_constants(cfg.alpha).q, label or f"grv[{cfg.alpha:.2f}]",
                    int(kept.sum()), np.flatnonzero(~kept) + 1)


def wgrv_fixed(path: SampledPath, cfg: FixedAlphaConfig, label: str | None = None) -> Estimate:
    """Winsorized GRV: increments capped at ``sqrt(S_j) * V_(s_n)``, divided by ``w(alpha)``.

    ``K`` is evaluated on the raw increment, so a truncated jump contributes 0.
    """
    kept, threshold = _fixed_filter(path, cfg)
    d = np.abs(path.increments)
    capped = np.minimum(d, np.sqrt(cfg.spot.values) * threshold)
    k = k_mask(path, cfg.trunc)
    total = float(np.sum(capped ** 2 * k))
    return Estimate(total / filter_constants(cfg.alpha).w, label or f"wgrv[{cfg.alpha:.2f}]",
                    int(np.count_nonzero(k)), np.flatnonzero(~kept) + 1)


def grv_constant_vol(path: SampledPath, alpha: float,
                     trunc: TruncationConfig = NO_TRUNCATION) -> Estimate:
    """GRV ranking the raw ``|dX_j|`` (spot variance taken as one)."""
    cfg = FixedAlphaConfig(alpha, SpotVolSeries.unit(path.n), trunc)
    return grv_fixed(path, cfg, label=f"grv[{alpha:.2f}]")


def _moving_filter(path: SampledPath, cfg: MovingThresholdConfig):
    v = _scaled_increments(path, cfg.spot)
    return _global_filter(v, path.n - cfg.cut_count(path.n))


def grv_moving(path: SampledPath, cfg: MovingThresholdConfig,
               label: str = "grv.mov") -> Estimate:
    kept, _ = _moving_filter(path, cfg)
    d = path.increments
    hm = h_mask(path, cfg.trunc)
    total = float(np.sum(d[kept] ** 2 * hm[kept]))
    return Estimate(total / cfg.resolved_qn(path.n), label, int(kept.sum()),
                    np.flatnonzero(~kept) + 1)


def wgrv_moving(path: SampledPath, cfg: MovingThresholdConfig,
                label: str = "wgrv.mov") -> Estimate:
    kept, threshold = _moving_filter(path, cfg)
    d = np.abs(path.increments)
    capped = np.minimum(d, np.sqrt(cfg.spot.values) * threshold)
    hm = h_mask(path, cfg.trunc)
    total = float(np.sum(capped ** 2 * hm))
    return Estimate(total / cfg.resolved_qn(path.n, winsorized=True), label,
                    int(np.count_nonzero(hm)),
                    np.flatnonzero(~kept) + 1)


# -- error measures ----------------------------------------------------------

def error_ratio(estimate, theta_true: float) -> float:
    """Percentage deviation ``100 (estimate - theta) / theta``."""
    if not theta_true > 0:
        raise ValueError(f"true integrated variance must be positive, got {theta_true!r}")
    return 100.0 * (float(estimate) - theta_true) / theta_true


def studentize(estimate, theta_true: float, gamma: float, n: int) -> float:
    if not gamma > 0:
        raise ValueError(f"asymptotic variance must be positive, got {gamma!r}")
    return math.sqrt(n) * (float(estimate) - theta_true) / math.sqrt(gamma)
