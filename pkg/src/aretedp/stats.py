"""Small statistical helpers used by the simulator and the test suite."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

__all__ = ["KsResult", "ks_two_sample", "ks_critical_value"]


class KsResult(NamedTuple):
    statistic: float
    critical_value: float
    significance: float

    @property
    def passed(self) -> bool:
        """True when the two samples are statistically indistinguishable at this level."""
        return self.statistic < self.critical_value


def ks_critical_value(n: int, m: int, significance: float = 1e-3) -> float:
    """Asymptotic two-sample Kolmogorov-Smirnov critical value.

    c(a) * sqrt((n + m) / (n * m)) with c(a) = sqrt(-ln(a / 2) / 2).
    """
    if not (0.0 < significance < 1.0):
        raise ValueError(f"significance must lie in (0, 1), got {significance}")
    c = math.sqrt(-0.5 * math.log(significance / 2.0))
    return c * math.sqrt((n + m) / (n * m))


def ks_two_sample(x: np.ndarray, y: np.ndarray, significance: float = 1e-3) -> KsResult:
    """Two-sample KS distance: sup |F_x - F_y| over the pooled sample points."""
    x = np.sort(np.asarray(x, dtype=np.float64))
    y = np.sort(np.asarray(y, dtype=np.float64))
    if x.size == 0 or y.size == 0:
        raise ValueError("both samples must be nonempty")
    pooled = np.concatenate([x, y])
    fx = np.searchsorted(x, pooled, side="right") / x.size
    fy = np.searchsorted(y, pooled, side="right") / y.size
    d = float(np.abs(fx - fy).max())
    return KsResult(d, ks_critical_value(x.size, y.size, significance), significance)
