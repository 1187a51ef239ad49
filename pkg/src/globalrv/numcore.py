"""Standard-normal helpers, filter constants and rank primitives.

Everything here is a pure function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "FilterConstants",
    "RankedValues",
    "filter_constants",
    "norm_cdf",
    "norm_pdf",
    "norm_quantile",
    "rank_and_order",
]

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)

# Acklam's rational approximation, relative error ~1.15e-9 before polishing.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def norm_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / _SQRT2PI


def norm_cdf(x: float) -> float:
    # erfc keeps full relative precision in both tails
    return 0.5 * math.erfc(-x / _SQRT2)


def _acklam(p: float) -> float:
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        return ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
                / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    if p > 1.0 - _P_LOW:
        q = math.sqrt(-2.0 * math.log1p(-p))
        return -((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
                 / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    q = p - 0.5
    r = q * q
    return ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
            / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))


def norm_quantile(p: float) -> float:
    """Inverse of the standard normal CDF.

    Acklam's rational approximation followed by one Newton step against
    :func:`norm_cdf`, which brings the absolute error below 1e-12.

    Raises
    ------
    ValueError
        If ``p`` is not strictly inside (0, 1).
    """
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {p!r}")
    if p == 0.5:
        return 0.0
    z = _acklam(p)
    if p > 0.5:
        # work with the upper tail so the residual is not swamped by 1 - p rounding
        resid = 0.5 * math.erfc(z / _SQRT2) - (1.0 - p)
        return z + resid / norm_pdf(z)
    resid = norm_cdf(z) - p
    return z - resid / norm_pdf(z)


@dataclass(frozen=True)
class FilterConstants:
    """Cut-off constants for a global jump filter with ratio ``alpha``.

    ``c`` is the upper-alpha point of chi-square(1), ``q`` the second moment
    of a standard normal truncated to ``z**2 <= c`` and ``w`` the second
    moment of ``min(z**2, c)``.  ``c`` is ``math.inf`` when ``alpha == 0``.
    """

    alpha: float
    c: float
    q: float
    w: float


def filter_constants(alpha: float) -> FilterConstants:
    alpha = float(alpha)
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"cut-off ratio must lie in [0, 1), got {alpha!r}")
    if alpha == 0.0:
        return FilterConstants(alpha=0.0, c=math.inf, q=1.0, w=1.0)
    a = norm_quantile(1.0 - alpha / 2.0)
    c = a * a
    q = (1.0 - alpha) - 2.0 * a * norm_pdf(a)
    return FilterConstants(alpha=alpha, c=c, q=q, w=q + alpha * c)


@dataclass(frozen=True)
class RankedValues:
    values: np.ndarray
    ranks: np.ndarray  # 1-based, rank 1 = smallest
    order_stats: np.ndarray

    def order_stat(self, k: int) -> float:
        """k-th smallest value (1-based)."""
        if not 1 <= k <= len(self.values):
            raise IndexError(f"order statistic index {k} out of range 1..{len(self.values)}")
        return float(self.order_stats[k - 1])


def rank_and_order(values) -> RankedValues:
    """Stable ascending ranks; ties go to the smaller original index."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("need a non-empty one-dimensional sequence")
    if not np.all(np.isfinite(arr)):
        raise ValueError("values must be finite")
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(arr.size, dtype=np.int64)
    ranks[order] = np.arange(1, arr.size + 1)
    return RankedValues(values=arr, ranks=ranks, order_stats=arr[order])
