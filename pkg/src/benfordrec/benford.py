"""Empirical Benford diagnostics on log10 significands y = log10|a_n| mod 1.

All statistics are computed on the same point set.  Zeros carry no
significand and are excluded (and counted); negative terms enter through
their absolute value.

A finite sample cannot separate first-digit Benford behaviour from the
strong (full significand) form.  The KS distance of the significand
against log10 s is the only statistic here that speaks to the latter, and
results that need the strong form should be judged on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

BENFORD_PROBS = np.log10(1.0 + 1.0 / np.arange(1, 10))
DIGIT_EDGES = np.log10(np.arange(1, 11))

CONSISTENT = "consistent"
INCONSISTENT = "inconsistent"
INSUFFICIENT = "insufficient-sample"


@dataclass(frozen=True)
class Thresholds:
    max_digit_dev: float = 0.01
    star_discrepancy: float = 0.02
    weyl: float = 0.05
    min_sample: int = 1000
    weyl_m: int = 10

    def to_dict(self) -> dict:
        return {"max_digit_dev": self.max_digit_dev, "star_discrepancy": self.star_discrepancy,
                "weyl": self.weyl, "min_sample": self.min_sample, "weyl_m": self.weyl_m}


DEFAULT_THRESHOLDS = Thresholds()


@dataclass(frozen=True)
class DigitHistogram:
    counts: tuple  # counts[d - 1] for leading digit d
    total: int
    excluded_zeros: int = 0

    @property
    def freqs(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=float) / self.total

    def freq(self, d: int) -> float:
        return self.counts[d - 1] / self.total

    def rows(self):
        """(d, observed frequency, expected frequency)."""
        for d in range(1, 10):
            yield d, self.freq(d), float(BENFORD_PROBS[d - 1])


@dataclass(frozen=True)
class BenfordReport:
    digit_hist: DigitHistogram
    max_digit_dev: float
    chi2: float
    ks_significand: float
    star_discrepancy: float
    weyl_sums: tuple
    verdict: str
    thresholds: Thresholds = DEFAULT_THRESHOLDS
    extra: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.digit_hist.total

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "excluded_zeros": self.digit_hist.excluded_zeros,
            "digit_counts": list(self.digit_hist.counts),
            "digit_freqs": [float(x) for x in self.digit_hist.freqs],
            "benford_probs": [float(x) for x in BENFORD_PROBS],
            "max_digit_dev": self.max_digit_dev,
            "chi2": self.chi2,
            "chi2_df": 8,
            "ks_significand": self.ks_significand,
            "star_discrepancy": self.star_discrepancy,
            "weyl_sums": list(self.weyl_sums),
            "verdict": self.verdict,
            "thresholds": self.thresholds.to_dict(),
            **self.extra,
        }


def _points(points) -> np.ndarray:
    y = np.asarray(points, dtype=float)
    if y.ndim != 1:
        raise ValueError("points must be one-dimensional")
    if np.any(~np.isfinite(y)) or np.any(y < 0) or np.any(y >= 1):
        raise ValueError("points must be finite and lie in [0, 1)")
    return y


def leading_digits(points) -> np.ndarray:
    """The unique d with log10 d <= y < log10(d + 1)."""
    y = _points(points)
    d = np.searchsorted(DIGIT_EDGES, y, side="right")
    return np.clip(d, 1, 9)


def digit_histogram(points, excluded_zeros: int = 0) -> DigitHistogram:
    d = leading_digits(points)
    counts = np.bincount(d, minlength=10)[1:10]
    return DigitHistogram(tuple(int(c) for c in counts), int(len(d)), int(excluded_zeros))


def star_discrepancy(points) -> float:
    """D*_N = max_i max(i/N - u_(i), u_(i) - (i-1)/N) over the sorted points."""
    u = np.sort(_points(points))
    n = len(u)
    if n == 0:
        raise ValueError("star discrepancy of an empty point set")
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - u), np.max(u - (i - 1) / n)))


def weyl_sums(points, M: int = 10) -> list:
    """|N^-1 sum_n exp(2 pi i m y_n)| for m = 1..M."""
    if M < 1:
        raise ValueError("M must be at least 1")
    y = _points(points)
    if len(y) == 0:
        raise ValueError("Weyl sums of an empty point set")
    out = []
    for m in range(1, M + 1):
        # reduce m*y mod 1 first so the phase stays accurate for large m
        phase = 2.0 * math.pi * np.mod(m * y, 1.0)
        s = complex(np.sum(np.cos(phase)), np.sum(np.sin(phase))) / len(y)
        out.append(min(abs(s), 1.0))
    return out


def ks_significand(points) -> float:
    """sup |ECDF of 10^y on [1, 10) - log10 s|, taken through scipy's one-sample KS."""
    y = _points(points)
    return float(stats.kstest(10.0 ** y, lambda s: np.log10(s)).statistic)


def chi2_digits(hist: DigitHistogram) -> float:
    expected = hist.total * BENFORD_PROBS
    return float(np.sum((np.asarray(hist.counts) - expected) ** 2 / expected))


def analyze(points, M: int | None = None, thresholds: Thresholds = DEFAULT_THRESHOLDS,
            excluded_zeros: int = 0) -> BenfordReport:
    y = _points(points)
    if len(y) == 0:
        raise ValueError("no points to analyze (empty or all-zero sequence)")
    M = thresholds.weyl_m if M is None else M
    hist = digit_histogram(y, excluded_zeros)
    dev = float(np.max(np.abs(hist.freqs - BENFORD_PROBS)))
    dstar = star_discrepancy(y)
    weyl = weyl_sums(y, M)
    if len(y) < thresholds.min_sample:
        verdict = INSUFFICIENT
    elif dev < thresholds.max_digit_dev and dstar < thresholds.star_discrepancy and max(weyl) < thresholds.weyl:
        verdict = CONSISTENT
    else:
        verdict = INCONSISTENT
    return BenfordReport(hist, dev, chi2_digits(hist), ks_significand(y), dstar, tuple(weyl), verdict, thresholds)


def analyze_sample(sample, M: int | None = None, thresholds: Thresholds = DEFAULT_THRESHOLDS) -> BenfordReport:
    """Analyze a SequenceSample: zeros dropped and counted, signs ignored."""
    fr = [y for v, y in zip(sample.values, sample.log10_frac) if v.sign != 0]
    zeros = len(sample.values) - len(fr)
    return analyze(fr, M, thresholds, excluded_zeros=zeros)


def significands_to_points(significands: Sequence[float]) -> np.ndarray:
    s = np.asarray(significands, dtype=float)
    y = np.log10(s)
    return np.where(y >= 1.0, np.nextafter(1.0, 0.0), y)


def kronecker_probe(alpha: float, target: float, eps: float, n_max: int = 10**7,
                    chunk: int = 1 << 20) -> int | None:
    """Smallest n <= n_max with |{n alpha} - target| < eps, or None.

    The fractional part is formed from n * frac(alpha) with the integer
    part removed per chunk, which keeps the absolute error near n * 1e-16.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not 0.0 <= target < 1.0:
        raise ValueError("target must lie in [0, 1)")
    a = alpha - math.floor(alpha)
    start = 1
    while start <= n_max:
        stop = min(start + chunk, n_max + 1)
        n = np.arange(start, stop, dtype=np.float64)
        x = np.mod(n * a, 1.0)
        hit = np.nonzero(np.abs(x - target) < eps)[0]
        if len(hit):
            return int(start + hit[0])
        start = stop
    return None
