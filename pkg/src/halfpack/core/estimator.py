"""
Steady-state estimation from one long run: time-weighted averages after a
warm-up cutoff, with batch-means confidence intervals.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy import stats

from halfpack.utils.errors import ConfigurationError, ContractViolation

DEFAULT_BATCHES = 20
DEFAULT_CONFIDENCE = 0.95


@dataclass(frozen=True)
class Estimate:
    """Point estimate with a normal-approximation CI half-width."""

    mean: float
    half_width: float
    batches: int
    inconclusive: bool = False

    @property
    def low(self) -> float:
        return self.mean - self.half_width

    @property
    def high(self) -> float:
        return self.mean + self.half_width

    @property
    def std_error(self) -> float:
        z = stats.norm.ppf(0.5 + DEFAULT_CONFIDENCE / 2)
        return self.half_width / z

    @classmethod
    def undetermined(cls, batches: int, mean: float = math.nan) -> "Estimate":
        return cls(mean=mean, half_width=math.nan, batches=batches, inconclusive=True)

    @classmethod
    def from_batch_means(
        cls, values: Sequence[float], confidence: float = DEFAULT_CONFIDENCE
    ) -> "Estimate":
        """Mean of approximately independent batch values and its CI; < 2 values is inconclusive."""
        values = np.asarray(values, dtype=np.float64)
        if values.size < 2:
            mean = float(values[0]) if values.size else math.nan
            return cls.undetermined(int(values.size), mean)
        z = stats.norm.ppf(0.5 + confidence / 2)
        half = z * float(np.std(values, ddof=1)) / math.sqrt(values.size)
        return cls(mean=float(np.mean(values)), half_width=half, batches=int(values.size))

    def covers(self, value: float) -> bool:
        return not self.inconclusive and self.low <= value <= self.high

    def clearly_below(self, other: "Estimate") -> bool:
        """True when the two intervals are disjoint and this one lies below."""
        return not (self.inconclusive or other.inconclusive) and self.high < other.low


def trend_decreasing(estimates: Sequence[Estimate]) -> bool:
    """
    CI-aware decreasing trend.

    Every point estimate must fall below its predecessor, and the last
    estimate must lie clearly below the first.
    """
    if len(estimates) < 2 or any(e.inconclusive for e in estimates):
        return False
    for earlier, later in zip(estimates, estimates[1:]):
        if not later.mean < earlier.mean:
            return False
    return estimates[-1].clearly_below(estimates[0])


class TimeAverageEstimator:
    """
    Running integral of one or more piecewise-constant series.

    The measured span [warmup, horizon) is split into ``batches`` equal
    batches; holding intervals straddling the warm-up cutoff or a batch
    boundary are clipped and split exactly.
    """

    def __init__(
        self,
        warmup: float,
        horizon: float,
        batches: int = DEFAULT_BATCHES,
        width: int = 1,
    ):
        if not 0 <= warmup < horizon:
            raise ConfigurationError(
                f"Need 0 <= warmup < horizon, got warmup={warmup}, horizon={horizon}"
            )
        if batches < 1 or width < 1:
            raise ConfigurationError(f"Need batches >= 1 and width >= 1, got {batches}, {width}")
        self.warmup = float(warmup)
        self.horizon = float(horizon)
        self.width = width
        self._batch_len = (self.horizon - self.warmup) / batches
        self._integral = np.zeros((batches, width), dtype=np.float64)
        self._time = np.zeros(batches, dtype=np.float64)

    @property
    def batches(self) -> int:
        return int(self._time.shape[0])

    @property
    def elapsed(self) -> float:
        return float(self._time.sum())

    @property
    def integral(self) -> np.ndarray:
        return self._integral.sum(axis=0)

    def accumulate(self, value, hold: float, clock: float):
        """
        Add ``value`` held over [clock, clock + hold).

        Parts before the warm-up cutoff or past the horizon are ignored.
        """
        if hold < 0:
            raise ContractViolation(f"Holding time must be non-negative, got {hold}")
        start = max(clock, self.warmup)
        end = min(clock + hold, self.horizon)
        if end <= start:
            return

        value = np.asarray(value, dtype=np.float64)
        last = self._time.shape[0] - 1
        batch = min(int((start - self.warmup) / self._batch_len), last)
        while start < end:
            boundary = (
                self.horizon if batch == last
                else self.warmup + (batch + 1) * self._batch_len
            )
            stop = min(end, boundary)
            span = stop - start
            if span > 0:
                self._integral[batch] += value * span
                self._time[batch] += span
            start = stop
            if batch == last:
                break
            batch += 1

    def batch_means(self, column: Optional[int] = None) -> np.ndarray:
        """Per-batch time averages of batches that saw any measured time."""
        seen = self._time > 0
        means = self._integral[seen] / self._time[seen, None]
        return means if column is None else means[:, column]

    def finalize(self, column: int = 0, confidence: float = DEFAULT_CONFIDENCE) -> Estimate:
        """
        Time average of one series with its batch-means CI.

        Too little measured time (under two non-empty batches) gives an
        inconclusive Estimate rather than a made-up interval.
        """
        elapsed = self.elapsed
        means = self.batch_means(column)
        if elapsed <= 0:
            return Estimate.undetermined(0)
        mean = float(self._integral[:, column].sum() / elapsed)
        if means.shape[0] < 2:
            return Estimate.undetermined(int(means.shape[0]), mean)

        z = stats.norm.ppf(0.5 + confidence / 2)
        half = z * float(np.std(means, ddof=1)) / math.sqrt(means.shape[0])
        return Estimate(mean=mean, half_width=half, batches=int(means.shape[0]))

    def finalize_all(self, confidence: float = DEFAULT_CONFIDENCE) -> List[Estimate]:
        return [self.finalize(col, confidence) for col in range(self.width)]

    def merge(self, other: "TimeAverageEstimator") -> "TimeAverageEstimator":
        """
        Pool two replications' estimators; batches are concatenated.

        Merging is associative, and the pooled estimates do not depend on
        the order replications are merged in beyond float rounding.
        """
        if other.width != self.width:
            raise ContractViolation(f"Cannot merge widths {self.width} and {other.width}")
        pooled = TimeAverageEstimator.__new__(TimeAverageEstimator)
        pooled.warmup = min(self.warmup, other.warmup)
        pooled.horizon = max(self.horizon, other.horizon)
        pooled.width = self.width
        pooled._batch_len = self._batch_len
        pooled._integral = np.concatenate([self._integral, other._integral])
        pooled._time = np.concatenate([self._time, other._time])
        return pooled


@dataclass(frozen=True)
class PoissonFit:
    statistic: float
    p_value: float
    dof: int
    samples: int
    rejected: bool


def poisson_fit_test(
    samples: Sequence[int], mean: float, alpha: float = 0.01, min_expected: float = 5.0
) -> PoissonFit:
    """
    Chi-square goodness of fit of integer samples against Poisson(mean).

    Neighbouring bins are pooled left to right until each expects at least
    ``min_expected`` samples; the last bin absorbs the upper tail.
    """
    samples = np.asarray(samples, dtype=np.int64)
    n = int(samples.size)
    if n == 0:
        raise ContractViolation("Poisson fit needs at least one sample")

    observed = np.bincount(samples)
    top = max(observed.size - 1, int(stats.poisson.ppf(1 - 1e-9, mean)))
    expected = n * stats.poisson.pmf(np.arange(top + 1), mean)
    expected[-1] += n * stats.poisson.sf(top, mean)
    observed = np.concatenate([observed, np.zeros(top + 1 - observed.size)])

    bins_obs: List[float] = []
    bins_exp: List[float] = []
    acc_obs = acc_exp = 0.0
    for o, e in zip(observed, expected):
        acc_obs += o
        acc_exp += e
        if acc_exp >= min_expected:
            bins_obs.append(acc_obs)
            bins_exp.append(acc_exp)
            acc_obs = acc_exp = 0.0
    if acc_exp > 0 or acc_obs > 0:
        if bins_obs:
            bins_obs[-1] += acc_obs
            bins_exp[-1] += acc_exp
        else:
            bins_obs.append(acc_obs)
            bins_exp.append(acc_exp)

    if len(bins_obs) < 2:
        return PoissonFit(statistic=0.0, p_value=1.0, dof=0, samples=n, rejected=False)

    # Guard the equal-totals check against float drift in the tail mass.
    exp = np.asarray(bins_exp)
    exp *= n / exp.sum()
    result = stats.chisquare(np.asarray(bins_obs), exp)
    p_value = float(result.pvalue)
    return PoissonFit(
        statistic=float(result.statistic),
        p_value=p_value,
        dof=len(bins_obs) - 1,
        samples=n,
        rejected=p_value < alpha,
    )
