"""Serialization helpers for exact values."""

from __future__ import annotations

from contextlib import contextmanager
from fractions import Fraction

import mpmath


def frac_str(x) -> str:
    """Exact rational as ``"p/q"`` (always with a denominator)."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_frac(s: str) -> Fraction:
    return Fraction(s)


def popcount(x: int) -> int:
    return bin(x).count("1")


@contextmanager
def iv_precision(bits: int):
    """Temporarily set the working precision of ``mpmath.iv``."""
    old = mpmath.iv.prec
    mpmath.iv.prec = bits
    try:
        yield mpmath.iv
    finally:
        mpmath.iv.prec = old


def iv_endpoints(x) -> tuple[mpmath.mpf, mpmath.mpf]:
    """Lower and upper endpoints of an interval as exact mpf values."""
    lo, hi = x._mpi_
    with mpmath.workprec(max(lo[3], hi[3], 53) + 8):
        return +mpmath.mpf(lo), +mpmath.mpf(hi)


def iv_str(x, digits: int = 20) -> list[str]:
    """Interval as ``[lower, upper]`` strings, lower rounded down and upper rounded up."""
    lo, hi = iv_endpoints(x)
    return [round_str(lo, digits, -1), round_str(hi, digits, 1)]


def round_str(v, digits: int, direction: int = 0) -> str:
    """``digits`` significant digits; direction -1/+1 rounds outward (down/up)."""
    with mpmath.workprec(4 * digits + 64):
        s = mpmath.nstr(v, digits)
        # nstr rounds to nearest; nudge outward so a printed interval still encloses
        if direction < 0 and mpmath.mpf(s) > v:
            s = mpmath.nstr(v - abs(v) * mpmath.mpf(10) ** (1 - digits), digits)
        if direction > 0 and mpmath.mpf(s) < v:
            s = mpmath.nstr(v + abs(v) * mpmath.mpf(10) ** (1 - digits), digits)
    return s
