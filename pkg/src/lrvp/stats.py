"""Summary statistics computed by the harness itself for reproducibility.

Quartiles use linear interpolation on the sorted sample: the p-quantile sits
at rank h = (n - 1) p and interpolates between the neighboring order
statistics. Outliers follow the 1.5 x IQR box-plot rule.
"""

import math

import numpy as np


def quantile(values, p: float) -> float:
    """Linear-interpolation quantile of a non-empty sample."""
    x = np.sort(np.asarray(values, dtype=np.float64))
    if x.size == 0:
        raise ValueError("empty sample")
    h = (x.size - 1) * p
    lo = int(math.floor(h))
    hi = min(lo + 1, x.size - 1)
    return float(x[lo] + (h - lo) * (x[hi] - x[lo]))


def quartiles(values) -> tuple[float, float, float]:
    """(Q1, median, Q3) with linear interpolation."""
    return quantile(values, 0.25), quantile(values, 0.5), quantile(values, 0.75)


def outlier_mask(values) -> np.ndarray:
    """True where a value falls outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR]."""
    x = np.asarray(values, dtype=np.float64)
    q1, _, q3 = quartiles(x)
    iqr = q3 - q1
    return (x < q1 - 1.5 * iqr) | (x > q3 + 1.5 * iqr)


def summarize(values) -> dict:
    """Median/quartile summary with the outlier count under the box-plot rule."""
    x = np.asarray(values, dtype=np.float64)
    q1, med, q3 = quartiles(x)
    mask = outlier_mask(x)
    return {
        "n": int(x.size),
        "median": med,
        "q1": q1,
        "q3": q3,
        "iqr": q3 - q1,
        "outliers": int(mask.sum()),
        "mean": float(x.mean()),
    }


def wilson_interval(errors: int, total: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion (default 95%)."""
    if total <= 0:
        raise ValueError("total must be positive")
    phat = errors / total
    denom = 1.0 + z * z / total
    center = (phat + z * z / (2 * total)) / denom
    half = z * math.sqrt(phat * (1 - phat) / total + z * z / (4 * total * total)) / denom
    return max(0.0, center - half), min(1.0, center + half)
