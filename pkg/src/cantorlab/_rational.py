"""Exact rational arithmetic backend.

The hot path of every scan in this package is exact rational arithmetic.
When gmpy2 is importable its GMP-backed ``mpq`` type is used; otherwise
the pure-Python :class:`fractions.Fraction` is used.  Both are exact, compare
equal and hash identically, so results never depend on the backend.

Set ``CANTORLAB_BACKEND=fraction`` to force the pure-Python fallback.
"""

from __future__ import annotations

import os
from fractions import Fraction
from functools import lru_cache

_requested = os.environ.get("CANTORLAB_BACKEND", "").strip().lower()

if _requested not in ("", "gmpy2", "fraction"):
    raise ImportError(f"unknown CANTORLAB_BACKEND {_requested!r}")

if _requested == "fraction":
    Rational = Fraction
    BACKEND = "fraction"
else:
    try:
        from gmpy2 import mpq as Rational  # type: ignore[assignment]

        BACKEND = "gmpy2"
    except ImportError:  # pragma: no cover - depends on environment
        if _requested == "gmpy2":
            raise
        Rational = Fraction
        BACKEND = "fraction"


def Q(value, denominator: int | None = None):
    """Coerce ``value`` (int, "p/q" text, Fraction, mpq) to the backend type."""
    if denominator is not None:
        return Rational(int(value), int(denominator))
    if isinstance(value, Rational):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Rational(value)
    if isinstance(value, str):
        return Rational(Fraction(value.strip()))
    if isinstance(value, float):
        raise TypeError("floats are not accepted; pass a 'p/q' string")
    # Fraction <-> mpq and anything else exposing numerator/denominator
    return Rational(int(value.numerator), int(value.denominator))


ZERO = Q(0)
ONE = Q(1)
HALF = Q(1, 2)


@lru_cache(maxsize=4096)
def dyadic(exponent: int):
    """Return 2**-exponent exactly."""
    if exponent >= 0:
        return Rational(1, 1 << exponent)
    return Rational(1 << -exponent)


def fmt(value) -> str:
    """Serialize a rational as "num/den" text (denominator always present)."""
    value = Q(value)
    return f"{value.numerator}/{value.denominator}"


def floor_log2(value) -> int:
    """Exact floor(log2(value)) for a positive rational."""
    value = Q(value)
    if value <= 0:
        raise ValueError("floor_log2 needs a positive argument")
    num, den = int(value.numerator), int(value.denominator)
    k = num.bit_length() - den.bit_length()
    # 2**k <= value < 2**(k+1) after at most one correction step
    if k >= 0:
        if num < den << k:
            k -= 1
    else:
        if num << -k < den:
            k -= 1
    return k


def ceil_log2(value) -> int:
    value = Q(value)
    k = floor_log2(value)
    return k if value == dyadic(-k) else k + 1
