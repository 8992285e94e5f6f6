"""Scientific-notation numbers: sign, binary64 mantissa in [1, 10), int64 decimal exponent.

Values such as 10**6! or the millionth Fibonacci number stay representable, and
the leading digit and significand can be read straight off the mantissa.
"""

from __future__ import annotations

import decimal
import math
from dataclasses import dataclass

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

# Beyond this exponent gap the smaller addend is below binary64 resolution.
ADD_GAP_LIMIT = 17

_POW10 = tuple(10.0**k for k in range(ADD_GAP_LIMIT + 1))
_EXACT_CTX = decimal.Context(prec=800, Emax=decimal.MAX_EMAX, Emin=decimal.MIN_EMIN)


class SciNumDomainError(ValueError):
    """Operation undefined for the given operand (non-finite input, log of zero, ...)."""


@dataclass(frozen=True, slots=True)
class SciNum:
    sign: int
    mantissa: float
    exponent: int

    def __post_init__(self):
        if self.sign == 0:
            if self.mantissa != 1.0 or self.exponent != 0:
                raise ValueError("zero must be canonical (0, 1.0, 0)")
        elif self.sign not in (1, -1) or not (1.0 <= self.mantissa < 10.0):
            raise ValueError(f"not normalized: {self.sign}, {self.mantissa!r}, {self.exponent}")
        if not (INT64_MIN <= self.exponent <= INT64_MAX):
            raise OverflowError("decimal exponent outside the 64-bit range")

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    @property
    def first_digit(self) -> int:
        if self.sign == 0:
            raise SciNumDomainError("zero has no leading digit")
        return int(self.mantissa)

    def log10_abs(self) -> float:
        """log10|x| as a float (loses fractional precision once the exponent is large)."""
        if self.sign == 0:
            raise SciNumDomainError("log of zero")
        return self.exponent + math.log10(self.mantissa)

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        # correctly rounded, handles overflow to inf and underflow to 0
        return float(f"{self.sign * self.mantissa!r}e{self.exponent}")

    def __neg__(self) -> SciNum:
        if self.sign == 0:
            return self
        return _make(-self.sign, self.mantissa, self.exponent)

    def __abs__(self) -> SciNum:
        if self.sign >= 0:
            return self
        return _make(1, self.mantissa, self.exponent)

    def __mul__(self, other: SciNum) -> SciNum:
        return mul(self, other)

    def __add__(self, other: SciNum) -> SciNum:
        return add(self, other)

    def __sub__(self, other: SciNum) -> SciNum:
        return add(self, -other)

    def __truediv__(self, other: SciNum) -> SciNum:
        return div(self, other)

    def __str__(self) -> str:
        return to_string(self)


def _make(sign: int, mantissa: float, exponent: int) -> SciNum:
    return SciNum(sign, mantissa, exponent)


ZERO = SciNum(0, 1.0, 0)
ONE = SciNum(1, 1.0, 0)


def from_real(v: float | int) -> SciNum:
    """Exact-shape conversion; the mantissa is the correctly rounded significand of ``v``."""
    if isinstance(v, bool):
        v = int(v)
    if isinstance(v, int):
        if v == 0:
            return ZERO
        d = decimal.Decimal(abs(v))
        sign = 1 if v > 0 else -1
    else:
        v = float(v)
        if not math.isfinite(v):
            raise SciNumDomainError(f"non-finite value {v!r}")
        if v == 0.0:
            return ZERO
        d = decimal.Decimal(abs(v))
        sign = 1 if v > 0 else -1
    e = d.adjusted()
    m = float(d.scaleb(-e, context=_EXACT_CTX))
    if m >= 10.0:
        m /= 10.0
        e += 1
    return _make(sign, m, e)


def from_log10(x: float, sign: int = 1) -> SciNum:
    """Number whose log10 magnitude is ``x``."""
    if not math.isfinite(x):
        raise OverflowError(f"log10 magnitude {x!r} is not finite")
    k = math.floor(x)
    m = 10.0 ** (x - k)
    if m >= 10.0:
        m = 1.0
        k += 1
    elif m < 1.0:
        m = 1.0
    return _make(sign, m, int(k))


def mul(a: SciNum, b: SciNum) -> SciNum:
    sign = a.sign * b.sign
    if sign == 0:
        return ZERO
    m = a.mantissa * b.mantissa
    e = a.exponent + b.exponent
    if m >= 10.0:
        m /= 10.0
        e += 1
    return _make(sign, m, e)


def div(a: SciNum, b: SciNum) -> SciNum:
    if b.sign == 0:
        raise ZeroDivisionError("SciNum division by zero")
    if a.sign == 0:
        return ZERO
    m = a.mantissa / b.mantissa
    e = a.exponent - b.exponent
    if m < 1.0:
        m *= 10.0
        e -= 1
    return _make(a.sign * b.sign, m, e)


def add(a: SciNum, b: SciNum) -> SciNum:
    """Signed sum. If the exponents differ by more than 17 the larger operand is returned as is."""
    if a.sign == 0:
        return b
    if b.sign == 0:
        return a
    if (a.exponent, a.mantissa) < (b.exponent, b.mantissa):
        a, b = b, a
    gap = a.exponent - b.exponent
    if gap > ADD_GAP_LIMIT:
        return a
    m = a.sign * a.mantissa + b.sign * b.mantissa / _POW10[gap]
    if m == 0.0:
        return ZERO
    sign = 1 if m > 0 else -1
    m = abs(m)
    e = a.exponent
    if m >= 10.0:
        m /= 10.0
        e += 1
    elif m < 1.0:
        shift = -math.floor(math.log10(m))
        m *= 10.0**shift
        e -= shift
        if m >= 10.0:
            m /= 10.0
            e += 1
        elif m < 1.0:
            m *= 10.0
            e -= 1
    return _make(sign, m, e)


def cancelled(a: SciNum, b: SciNum, total: SciNum, rel: float = 1e-12) -> bool:
    """True when ``total = a + b`` lost almost all significance to cancellation."""
    if a.sign == 0 or b.sign == 0 or a.sign == b.sign:
        return False
    if total.sign == 0:
        return True
    big = max(a.log10_abs(), b.log10_abs())
    return total.log10_abs() - big < math.log10(rel)


def pow_real(a: SciNum, e: float) -> SciNum:
    if a.sign != 1:
        raise SciNumDomainError("pow_real needs a strictly positive base")
    e = float(e)
    if e == 1.0:
        return a
    if e == 0.0:
        return ONE
    whole = e * a.exponent
    if not math.isfinite(whole):
        raise OverflowError("exponent overflow in pow_real")
    k = math.floor(whole)
    frac = (whole - k) + e * math.log10(a.mantissa)
    return from_log10(frac, 1) if k == 0 else _shift(from_log10(frac, 1), int(k))


def _shift(x: SciNum, k: int) -> SciNum:
    return _make(x.sign, x.mantissa, x.exponent + k)


def log10_frac(a: SciNum) -> float:
    """Fractional part of log10|a|, i.e. log10 of the significand, in [0, 1)."""
    if a.sign == 0:
        raise SciNumDomainError("log10_frac of zero")
    y = math.log10(a.mantissa)
    if y >= 1.0:
        y = math.nextafter(1.0, 0.0)
    return y


def to_string(a: SciNum) -> str:
    """``±m.mmmmmmmmmmmmmmmme±k``; 17 significant digits, so parsing gives back the same bits."""
    if a.sign == 0:
        return "0"
    return f"{'+' if a.sign > 0 else '-'}{a.mantissa:.16f}e{a.exponent:+d}"


def from_string(text: str) -> SciNum:
    text = text.strip()
    if text in ("0", "+0", "-0"):
        return ZERO
    body, sep, exp = text.partition("e")
    if not sep or not body or body[0] not in "+-":
        raise ValueError(f"malformed SciNum string {text!r}")
    m = float(body[1:])
    return SciNum(1 if body[0] == "+" else -1, m, int(exp))


def product(values) -> SciNum:
    out = ONE
    for v in values:
        out = mul(out, v if isinstance(v, SciNum) else from_real(v))
    return out
