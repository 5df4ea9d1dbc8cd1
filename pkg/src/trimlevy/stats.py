"""Small statistics helpers for Monte Carlo verification."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy import stats as _st

# mean and standard deviation of the Kolmogorov limit law (sqrt(N) * KS under the null)
KOLMOGOROV_MEAN = math.sqrt(math.pi / 2.0) * math.log(2.0)
KOLMOGOROV_SD = math.sqrt(math.pi**2 / 12.0 - KOLMOGOROV_MEAN**2)


def ks_distance(sample, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """One-sample Kolmogorov-Smirnov statistic sup |F_N - F|."""
    x = np.sort(np.asarray(sample, float).ravel())
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    f = np.asarray(cdf(x), float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n), 0.0))


def ks_two_sample(a, b) -> float:
    return float(_st.ks_2samp(np.ravel(a), np.ravel(b)).statistic)


def ks_critical(n: int, sigmas: float = 3.0, m: int | None = None) -> float:
    """Null mean plus ``sigmas`` standard deviations of the KS statistic.

    With ``m`` given, the two-sample statistic with sizes n and m.
    """
    eff = n if m is None else n * m / (n + m)
    return (KOLMOGOROV_MEAN + sigmas * KOLMOGOROV_SD) / math.sqrt(eff)


def ks_se(n: int) -> float:
    return KOLMOGOROV_SD / math.sqrt(n)


def mean_se(values) -> tuple[float, float]:
    v = np.asarray(values, float)
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


def wilson_interval(k: int, n: int, z: float = 1.96) -> tuple[float, float]:
    if n <= 0:
        raise ValueError("n must be positive")
    p = k / n
    d = 1.0 + z * z / n
    c = (p + z * z / (2 * n)) / d
    h = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / d
    return max(0.0, c - h), min(1.0, c + h)


def cf_estimate(z) -> tuple[complex, float]:
    z = np.asarray(z)
    m = complex(z.mean())
    se = math.sqrt(float(np.mean(np.abs(z - m) ** 2)) / z.size)
    return m, se
