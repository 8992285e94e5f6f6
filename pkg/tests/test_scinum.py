import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from benfordrec.scinum import (
    ONE, ZERO, SciNum, SciNumDomainError, add, cancelled, div, from_log10, from_real, from_string,
    log10_frac, mul, pow_real, product, to_string,
)

finite = st.floats(allow_nan=False, allow_infinity=False, min_value=-1e300, max_value=1e300)
nonzero = finite.filter(lambda x: abs(x) > 1e-300)


def _exact_mantissa(n: int) -> tuple[Fraction, int]:
    e = len(str(abs(n))) - 1
    return Fraction(abs(n), 10**e), e


def test_normalization_rules():
    with pytest.raises(ValueError):
        SciNum(1, 10.0, 0)
    with pytest.raises(ValueError):
        SciNum(1, 0.5, 0)
    with pytest.raises(ValueError):
        SciNum(0, 2.0, 0)
    with pytest.raises(OverflowError):
        SciNum(1, 1.0, 2**63)
    assert from_real(0.0) is ZERO or from_real(0.0) == ZERO


@given(finite)
def test_from_real_round_trips_through_float(x):
    # the mantissa is a rounded decimal significand, so one ulp either way
    s = from_real(x)
    assert float(s) == pytest.approx(x, rel=3e-16, abs=0.0)
    if x:
        assert 1.0 <= s.mantissa < 10.0


@given(nonzero, nonzero)
def test_mul_div_match_float(a, b):
    p = a * b
    if math.isfinite(p) and abs(p) > 1e-290:
        assert math.isclose(float(mul(from_real(a), from_real(b))), p, rel_tol=1e-15)  # three roundings
    q = a / b
    if math.isfinite(q) and abs(q) > 1e-290:
        assert math.isclose(float(div(from_real(a), from_real(b))), q, rel_tol=1e-15)  # three roundings


@given(st.floats(-1e15, 1e15), st.floats(-1e15, 1e15))
def test_add_matches_float(a, b):
    got = float(add(from_real(a), from_real(b)))
    want = a + b
    assert got == pytest.approx(want, rel=1e-15, abs=1e-15 * max(abs(a), abs(b)))


def test_add_drops_negligible_operand():
    big = SciNum(1, 1.0, 40)
    assert add(big, ONE) == big
    assert add(SciNum(1, 1.0, 15), ONE).mantissa == pytest.approx(1.000000000000001, rel=1e-16)


def test_product_beyond_double_range():
    # 3^5000 overflows binary64 but not SciNum
    got = product([3] * 5000)
    m, e = _exact_mantissa(3**5000)
    assert got.exponent == e
    assert got.mantissa == pytest.approx(float(m), rel=1e-12)


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        div(ONE, ZERO)


@given(st.builds(SciNum, st.sampled_from([-1, 1]), st.floats(1.0, 9.999999999999998),
                 st.integers(-10**12, 10**12)))
def test_string_round_trip_is_bit_exact(x):
    assert from_string(to_string(x)) == x


def test_string_forms():
    assert to_string(from_real(-1250.0)) == "-1.2500000000000000e+3"
    assert to_string(from_real(0.5)) == "+5.0000000000000000e-1"
    assert from_string("0") == ZERO
    with pytest.raises(ValueError):
        from_string("1.5e3")


def test_log10_frac_and_from_log10():
    x = from_log10(123.30103)
    assert x.exponent == 123
    assert log10_frac(x) == pytest.approx(0.30103, abs=1e-12)
    with pytest.raises(SciNumDomainError):
        log10_frac(ZERO)
    with pytest.raises(OverflowError):
        from_log10(math.inf)


@given(st.floats(0.1, 1e6), st.floats(-50, 50))
def test_pow_real_in_log_space(base, e):
    got = pow_real(from_real(base), e)
    assert got.log10_abs() == pytest.approx(e * math.log10(base), rel=1e-12, abs=1e-12)


def test_pow_real_needs_positive_base():
    with pytest.raises(SciNumDomainError):
        pow_real(from_real(-2.0), 0.5)


def test_cancellation_flag():
    a = from_real(1.0)
    b = from_real(-1.0 + 1e-14)
    assert cancelled(a, b, add(a, b))
    assert not cancelled(a, from_real(-0.5), add(a, from_real(-0.5)))


@pytest.mark.parametrize("v,parts", [
    (0.0, (0, 1.0, 0)), (354.0, (1, 3.54, 2)), (-0.002, (-1, 2.0, -3)),
])
def test_normalized_parts(v, parts):
    x = from_real(v)
    assert (x.sign, x.exponent) == (parts[0], parts[2])
    assert x.mantissa == pytest.approx(parts[1], rel=1e-15)


def test_hand_arithmetic():
    assert mul(from_real(2e3), from_real(5e2)) == SciNum(1, 1.0, 6)
    assert mul(from_real(7.5), ZERO) == ZERO
    assert add(ONE, from_real(-1.0)) == ZERO
    s = add(from_real(9.5), from_real(9.5))
    assert (s.mantissa, s.exponent) == (1.9, 1)
    assert pow_real(from_real(100.0), 0.5) == SciNum(1, 1.0, 1)
    x = from_real(7.25)
    assert pow_real(x, 1.0) == x
    p = pow_real(from_real(2.0), 10)
    assert p.exponent == 3 and p.mantissa == pytest.approx(1.024, rel=1e-15)


def test_factorial_25_and_fibonacci_100():
    f = product(range(1, 26))
    m, e = _exact_mantissa(15511210043330985984000000)
    assert f.exponent == e == 25 and f.mantissa == pytest.approx(float(m), rel=1e-14)
    a, b = ONE, ONE
    for _ in range(98):
        a, b = b, add(a, b)
    m, e = _exact_mantissa(354224848179261915075)
    assert b.exponent == e == 20 and b.mantissa == pytest.approx(float(m), rel=1e-14)
    assert log10_frac(b) == pytest.approx(math.log10(float(m)), abs=1e-14)
    assert log10_frac(b) == pytest.approx(0.54927902282986, abs=1e-13)  # mpmath, 30 digits


def test_log10_frac_examples():
    assert log10_frac(SciNum(1, 1.0, 7)) == 0.0
    assert log10_frac(SciNum(1, 2.0, 0)) == pytest.approx(0.30102999566398120)


@given(nonzero, nonzero)
def test_results_stay_normalized(a, b):
    x, y = from_real(a), from_real(b)
    for r in (mul(x, y), div(x, y), add(x, y), add(x, -y)):
        assert r.sign == 0 or 1.0 <= r.mantissa < 10.0
