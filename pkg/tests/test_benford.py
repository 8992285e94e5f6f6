import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from benfordrec import benford as bf

unit = st.floats(0.0, 1.0, exclude_max=True)


def test_probabilities():
    assert bf.BENFORD_PROBS.sum() == pytest.approx(1.0, abs=1e-15)
    assert bf.BENFORD_PROBS[0] == pytest.approx(math.log10(2))


@given(st.lists(unit, min_size=1, max_size=200))
def test_leading_digit_from_point(ys):
    d = bf.leading_digits(ys)
    for y, k in zip(ys, d):
        assert int(10**y) == k or abs(10**y - round(10**y)) < 1e-12


@given(st.lists(unit, min_size=1, max_size=60))
def test_star_discrepancy_brute_force(ys):
    u = sorted(ys)
    N = len(u)
    # sup over anchored boxes [0, t): check at every point and just past it
    want = 0.0
    for t in u + [1.0]:
        below = sum(1 for x in u if x < t)
        upto = sum(1 for x in u if x <= t)
        want = max(want, abs(below / N - t), abs(upto / N - t))
    assert bf.star_discrepancy(ys) == pytest.approx(want, abs=1e-12)


def test_weyl_sums_known_cases():
    assert bf.weyl_sums(np.zeros(50), 3) == pytest.approx([1.0, 1.0, 1.0])
    pts = np.arange(8) / 8
    s = bf.weyl_sums(pts, 8)
    assert s[:7] == pytest.approx([0.0] * 7, abs=1e-12)
    assert s[7] == pytest.approx(1.0)


@given(st.lists(unit, min_size=1, max_size=100), st.integers(1, 12))
def test_weyl_sums_bounded(ys, M):
    s = bf.weyl_sums(ys, M)
    assert len(s) == M
    assert all(0.0 <= v <= 1.0 + 1e-12 for v in s)


def test_ks_and_chi2_on_exact_benford_sample():
    pts = (np.arange(10000) + 0.5) / 10000
    rep = bf.analyze(pts)
    assert rep.ks_significand < 1e-4
    assert rep.chi2 < 0.01
    assert rep.verdict == bf.CONSISTENT


def test_verdicts_and_thresholds():
    pts = (np.arange(999) + 0.5) / 999
    assert bf.analyze(pts).verdict == bf.INSUFFICIENT
    ones = np.zeros(2000)
    assert bf.analyze(ones).verdict == bf.INCONSISTENT
    loose = bf.Thresholds(max_digit_dev=1.0, star_discrepancy=1.01, weyl=1.01, min_sample=10)
    assert bf.analyze(ones, thresholds=loose).verdict == bf.CONSISTENT
    with pytest.raises(ValueError):
        bf.analyze([])


def test_report_dict_contents():
    d = bf.analyze((np.arange(1500) + 0.5) / 1500, excluded_zeros=3).to_dict()
    assert d["n"] == 1500 and d["excluded_zeros"] == 3
    assert sum(d["digit_counts"]) == 1500
    assert d["verdict"] == bf.CONSISTENT


def test_significands_to_points():
    y = bf.significands_to_points([1.0, 2.0, 9.999999999999999, 10.0])
    assert y[0] == 0.0 and y[1] == pytest.approx(math.log10(2))
    assert np.all(y < 1.0)


def test_kronecker_probe():
    a = math.log10(2)
    n = bf.kronecker_probe(a, 0.5, 1e-3)
    assert n is not None
    assert abs((n * a) % 1.0 - 0.5) < 1e-3
    assert all(abs((k * a) % 1.0 - 0.5) >= 1e-3 for k in range(1, n))
    assert bf.kronecker_probe(0.25, 0.1, 1e-3, n_max=1000) is None
    with pytest.raises(ValueError):
        bf.kronecker_probe(a, 1.5, 1e-3)


def test_single_atom():
    rep = bf.analyze(np.full(1200, math.log10(1.5)))
    assert rep.digit_hist.freq(1) == 1.0
    assert rep.max_digit_dev == pytest.approx(1 - math.log10(2), abs=1e-15)
    assert rep.verdict == bf.INCONSISTENT


def test_star_discrepancy_examples():
    assert bf.star_discrepancy([0, 0.25, 0.5, 0.75]) == pytest.approx(0.25)
    for N in (3, 10, 1000):
        assert bf.star_discrepancy(np.arange(N) / N) == pytest.approx(1 / N)


def test_weyl_sqrt2_under_geometric_bound():
    N = 10**4
    a = math.sqrt(2)
    pts = (np.arange(1, N + 1) * a) % 1.0
    s = bf.weyl_sums(pts, 10)
    for m, v in enumerate(s, start=1):
        bound = 2 / (N * abs(1 - np.exp(2j * np.pi * m * a)))
        assert v <= bound * (1 + 1e-6) + 1e-12
        assert v < 0.05


def test_grid_weyl_cancels():
    N = 64
    s = bf.weyl_sums(np.arange(N) / N, N - 1)
    assert max(s) < 1e-12


def test_kronecker_examples():
    assert bf.kronecker_probe(0.5, 0.5, 0.01) == 1
    assert bf.kronecker_probe(1 / 3, 0.5, 0.01, n_max=10**5) is None
    n = bf.kronecker_probe(math.log10(2), 0.5, 1e-4)
    assert n is not None and abs((n * math.log10(2)) % 1.0 - 0.5) < 1e-4


@given(st.lists(unit, min_size=2, max_size=80), st.randoms(use_true_random=False))
def test_permutation_invariance(ys, rnd):
    shuffled = list(ys)
    rnd.shuffle(shuffled)
    a, b = bf.analyze(ys).to_dict(), bf.analyze(shuffled).to_dict()
    for k in ("digit_counts", "max_digit_dev", "chi2", "verdict"):
        assert a[k] == b[k]
    for k in ("star_discrepancy", "ks_significand"):
        assert a[k] == pytest.approx(b[k], abs=1e-15)
    assert a["weyl_sums"] == pytest.approx(b["weyl_sums"], abs=1e-12)
