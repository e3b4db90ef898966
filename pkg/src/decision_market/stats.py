"""Return construction, moments and herding diagnostics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .equilibrium import PriceSeries


@dataclass
class ReturnSeries:
    interval: int
    times: np.ndarray
    values: np.ndarray

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class MomentSummary:
    """Sample moments; ``kurtosis`` is Pearson's m4/m2**2 (normal = 3)."""

    n: int
    mean: float
    variance: float
    skewness: float
    kurtosis: float

    @property
    def excess_kurtosis(self) -> float:
        return self.kurtosis - 3.0


@dataclass(frozen=True)
class ImbalanceStats:
    variance: float
    lag1_autocorr: float
    longest_one_sided_run: int


def make_returns(prices: PriceSeries, interval: int, log: bool = False) -> ReturnSeries:
    """Returns over consecutive non-overlapping windows of ``interval`` samples.

    Relative returns by default; ``log=True`` gives log returns.
    """
    if interval < 1:
        raise ValueError(f"interval must be >= 1, got {interval}")
    n = len(prices)
    if n <= interval:
        raise ValueError(f"series of length {n} is too short for interval {interval}")
    idx = np.arange((n - 1) // interval + 1) * interval
    lv = prices.log_values[idx]
    d = np.diff(lv)
    if log:
        values = d
    else:
        v = prices.values[idx]
        if np.all(np.isfinite(v)) and np.all(v > 0.0):
            values = v[1:] / v[:-1] - 1.0
        else:
            with np.errstate(over="ignore"):
                values = np.expm1(d)
    times = prices.t0 + prices.dt * idx[:-1]
    return ReturnSeries(interval=interval, times=times, values=values)


def _central_moments(xs) -> tuple[int, float, float, float, float]:
    x = np.asarray(xs, dtype=float)
    mu = x.mean()
    d = x - mu
    d2 = d * d
    return x.size, float(mu), float(d2.mean()), float((d2 * d).mean()), float((d2 * d2).mean())


def kurtosis(xs) -> float:
    """Pearson kurtosis m4 / m2**2 with population moments."""
    n, _, m2, _, m4 = _central_moments(xs)
    if n < 4:
        raise ValueError(f"kurtosis needs at least 4 values, got {n}")
    if m2 == 0.0:
        raise ValueError("kurtosis of a constant sample is undefined")
    return m4 / (m2 * m2)


def moments(xs) -> MomentSummary:
    n, mu, m2, m3, m4 = _central_moments(xs)
    if n < 4:
        raise ValueError(f"need at least 4 values, got {n}")
    if m2 == 0.0:
        raise ValueError("moments of a constant sample are undefined")
    return MomentSummary(n=n, mean=mu, variance=m2, skewness=m3 / m2 ** 1.5, kurtosis=m4 / (m2 * m2))


def imbalance_stats(imbalance) -> ImbalanceStats:
    """Variance, lag-1 autocorrelation and longest same-sign run of a series.

    The autocorrelation is the Pearson correlation of consecutive pairs, and
    zero when either half of the pairs is constant. Zero values count as
    their own sign.
    """
    x = np.asarray(imbalance, dtype=float)
    if x.size == 0:
        raise ValueError("imbalance series is empty")
    var = float(x.var())
    ac = 0.0
    if x.size > 2:
        a, b = x[:-1] - x[:-1].mean(), x[1:] - x[1:].mean()
        denom = np.sqrt(np.dot(a, a) * np.dot(b, b))
        if denom > 0.0:
            ac = float(np.dot(a, b) / denom)
    sign = np.sign(x)
    change = np.flatnonzero(sign[1:] != sign[:-1])
    bounds = np.concatenate(([-1], change, [x.size - 1]))
    longest = int(np.diff(bounds).max())
    return ImbalanceStats(var, ac, longest)


def histogram(xs, bins: int = 50) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Density histogram and the normal density with the sample's mean and variance.

    Returns:
        (bin centres, density, normal density at the centres).
    """
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    x = np.asarray(xs, dtype=float)
    density, edges = np.histogram(x, bins=bins, density=True)
    centres = 0.5 * (edges[:-1] + edges[1:])
    mu, var = x.mean(), x.var()
    if var > 0.0:
        normal = np.exp(-0.5 * (centres - mu) ** 2 / var) / np.sqrt(2.0 * np.pi * var)
    else:
        normal = np.zeros_like(centres)
    return centres, density, normal
