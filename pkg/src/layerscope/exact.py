"""Exact scalar handling shared by every module.

Distances and filtration parameters are kept as :class:`fractions.Fraction`
so that coincident distances compare equal bit-for-bit and strict
inequalities such as ``c + eps + delta < gap`` are decided without rounding.
"""
from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

import numpy as np

__all__ = ["as_exact", "is_float_like", "format_value"]

# longest fractional part written out as a plain decimal in reports
_MAX_DECIMALS = 20


def is_float_like(x) -> bool:
    return isinstance(x, (float, np.floating))


def as_exact(x) -> Fraction:
    """Convert ``x`` to a Fraction.

    Strings are read as exact decimals (``"0.1"`` is one tenth, ``"1/3"`` is a
    third). Floats go through their shortest ``repr`` so that ``0.1`` also
    means one tenth rather than the nearest binary double.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (bool, np.bool_)):
        raise TypeError(f"boolean is not a numeric value: {x!r}")
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if is_float_like(x):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value: {x!r}")
        return Fraction(repr(float(x)))
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, str):
        text = x.strip()
        if not text:
            raise ValueError("empty numeric field")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a number: {x!r}") from exc
    raise TypeError(f"cannot interpret {x!r} as an exact number")


def _terminates(q: Fraction) -> int | None:
    d = q.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return None
    return max(twos, fives)


def format_value(q) -> str:
    """Deterministic text form: exact decimal when short, else ``p/q`` or a float repr."""
    q = as_exact(q)
    if q.denominator == 1:
        return str(q.numerator)
    places = _terminates(q)
    if places is not None and places <= _MAX_DECIMALS:
        sign = "-" if q < 0 else ""
        scaled = abs(q) * 10**places
        whole, frac = divmod(int(scaled), 10**places)
        return f"{sign}{whole}.{frac:0{places}d}".rstrip("0").rstrip(".")
    if places is None and q.denominator < 10**6:
        return f"{q.numerator}/{q.denominator}"
    return repr(float(q))
