"""Exact scalar helpers.

All exact quantities in the package are `fractions.Fraction` values; dyadics
(m * 2**e) are the subset whose denominator is a power of two.  This module
provides constructors, dyadic decomposition, logarithms that survive
arbitrarily large numerators, and the JSON wire form
{"num": "<decimal>", "den": "<decimal>"}.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import DomainError

ExactLike = "int | Fraction | str"

_LN2 = math.log(2.0)


def exact(value) -> Fraction:
    """Coerce an int, Fraction, decimal string, or float to an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise DomainError("booleans are not scalars")
    if isinstance(value, (int, str)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise DomainError(f"non-finite value {value!r} is not an exact scalar")
        return Fraction(value)
    raise DomainError(f"cannot coerce {type(value).__name__} to an exact scalar")


def pow2(e: int) -> Fraction:
    """2**e as an exact Fraction, for any integer e."""
    if e >= 0:
        return Fraction(1 << e)
    return Fraction(1, 1 << (-e))


def dyadic(mantissa: int, exp2: int) -> Fraction:
    """mantissa * 2**exp2 exactly."""
    return mantissa * pow2(exp2)


def is_dyadic(x) -> bool:
    den = exact(x).denominator
    return den & (den - 1) == 0


def dyadic_parts(x) -> tuple[int, int]:
    """Decompose a dyadic as (odd mantissa, exp2).  Zero maps to (0, 0)."""
    f = exact(x)
    if not is_dyadic(f):
        raise DomainError(f"{f} is not dyadic")
    num, den = f.numerator, f.denominator
    if num == 0:
        return (0, 0)
    exp = -(den.bit_length() - 1)
    while num % 2 == 0:
        num //= 2
        exp += 1
    return (num, exp)


def log_int(n: int) -> float:
    """Natural log of a positive integer of any size."""
    if n <= 0:
        raise DomainError("log of a non-positive integer")
    shift = n.bit_length() - 53
    if shift <= 0:
        return math.log(n)
    return math.log(n >> shift) + shift * _LN2


def log_fraction(x) -> float:
    """Natural log of a positive rational, safe for huge numerators/denominators."""
    f = exact(x)
    if f <= 0:
        raise DomainError("log of a non-positive rational")
    return log_int(f.numerator) - log_int(f.denominator)


def log2_fraction(x) -> float:
    return log_fraction(x) / _LN2


def floor_log2_fraction(x) -> int:
    """Exact floor(log2 x) for a positive rational."""
    f = exact(x)
    if f <= 0:
        raise DomainError("log of a non-positive rational")
    num, den = f.numerator, f.denominator
    k = num.bit_length() - den.bit_length()
    # num/den in [2**(k-1), 2**(k+1)); settle by exact comparison.
    if f >= pow2(k + 1):
        k += 1
    elif f < pow2(k):
        k -= 1
    return k


def to_float(x) -> float:
    """Fraction to float, falling back to log-scaling when float() overflows."""
    f = exact(x)
    try:
        return float(f)
    except OverflowError:
        return math.inf if f > 0 else -math.inf


def scalar_to_json(x) -> dict:
    f = exact(x)
    return {"num": str(f.numerator), "den": str(f.denominator)}


def scalar_from_json(obj) -> Fraction:
    try:
        return Fraction(int(obj["num"]), int(obj["den"]))
    except (KeyError, TypeError, ValueError) as err:
        raise DomainError(f"malformed exact scalar {obj!r}") from err


def matrix_to_json(rows) -> list:
    return [[scalar_to_json(x) for x in row] for row in rows]


def matrix_from_json(rows) -> tuple:
    return tuple(tuple(scalar_from_json(x) for x in row) for row in rows)
