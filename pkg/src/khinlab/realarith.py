"""Fixed-precision real arithmetic for comparisons against transcendental values."""
from __future__ import annotations

from contextlib import contextmanager
from fractions import Fraction

import mpmath

MIN_PRECISION = 113
_precision = 128


def precision() -> int:
    return _precision


def set_precision(bits: int) -> None:
    global _precision
    if bits < MIN_PRECISION:
        raise ValueError(f"precision must be at least {MIN_PRECISION} bits")
    _precision = bits


@contextmanager
def working_precision(bits: int | None = None):
    with mpmath.workprec(bits or _precision):
        yield


def mpf(x) -> mpmath.mpf:
    """Exact rational -> mpf at the current working precision."""
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def fmt_real(x) -> str:
    """Scientific notation with 25 significant digits."""
    if x == 0:
        return "0." + "0" * 24 + "e+0"
    with working_precision():
        s = mpmath.nstr(mpf(x), 25, min_fixed=1, max_fixed=0, strip_zeros=False)
    # nstr leaves exponent zero in fixed form
    return s if "e" in s or not mpmath.isfinite(mpf(x)) else s + "e+0"


def fmt_rational(x: Fraction) -> str:
    """``p/q``, or a bare integer when the denominator is 1."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"
