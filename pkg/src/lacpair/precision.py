"""Fractional parts theta_x = {alpha * a(x)} for rapidly growing a(x).

a(x) grows like C**x, so alpha * a(x) carries about x * log2(C) integer bits
before the binary point.  Every product here is formed at

    required_bits(seq, x) + bits(alpha)

bits, which leaves ``guard`` bits for the fractional part.  Only the final
fractional part is rounded to a double (or to a 64-bit fixed-point word).
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional, Union

import gmpy2
import numpy as np
from gmpy2 import mpfr, mpq, mpz

from .sequences import LacunarySequence, SequenceError, parse_rational

__all__ = [
    "BigReal",
    "PrecisionBudgetError",
    "DEFAULT_GUARD",
    "as_alpha",
    "required_bits",
    "frac_dilate",
    "theta_table",
    "exact_frac_rational",
]

BigReal = mpfr  # precision travels with the value: ``x.precision``
DEFAULT_GUARD = 96
TWO64 = 1 << 64

AlphaLike = Union[str, int, float, Fraction, "mpq", "mpfr"]


class PrecisionBudgetError(ArithmeticError):
    """A request needs more precision than the configured budget allows."""


def as_alpha(alpha: AlphaLike):
    """Normalise a dilation parameter to an exact ``mpq`` where possible.

    Strings are parsed as exact decimals or rationals.  Floats are accepted
    for sampled values; a double is itself an exact dyadic rational, so the
    conversion loses nothing.  ``mpfr`` inputs are passed through.
    """
    if isinstance(alpha, type(mpfr(0))):
        return alpha
    if isinstance(alpha, type(mpq(0))):
        return alpha
    if isinstance(alpha, float):
        if not math.isfinite(alpha):
            raise ValueError(f"alpha must be finite, got {alpha}")
        return mpq(*alpha.as_integer_ratio())
    if isinstance(alpha, str):
        alpha = parse_rational(alpha)
    if isinstance(alpha, int):
        return mpq(alpha, 1)
    if isinstance(alpha, Fraction):
        return mpq(alpha.numerator, alpha.denominator)
    raise TypeError(f"unsupported alpha type {type(alpha).__name__}")


def _alpha_bits(alpha) -> int:
    a = abs(alpha)
    if a <= 1:
        return 0
    if isinstance(a, type(mpq(0))):
        return int(gmpy2.ceil(mpfr(a, 64))).bit_length() + 1
    return int(gmpy2.ceil(a)).bit_length() + 1


def required_bits(seq: LacunarySequence, x_max: int, guard: int = DEFAULT_GUARD) -> int:
    """ceil(x_max * log2(C)) + guard, or ceil(log2 a(x_max)) + guard for tables."""
    if x_max < 1:
        raise ValueError("x_max must be >= 1")
    if guard < 32:
        raise ValueError("guard must be >= 32 bits")
    if seq.kind == "geometric":
        p, q = mpz(seq.ratio.numerator) ** x_max, mpz(seq.ratio.denominator) ** x_max
        # smallest k with q * 2**k >= p
        k = max(p.bit_length() - q.bit_length() - 1, 0)
        while (q << k) < p:
            k += 1
        return k + guard
    if seq.kind == "exp":
        # x log2 e is irrational for x >= 1, so ceil is safe at 128 bits
        with gmpy2.context(gmpy2.get_context(), precision=128):
            return int(gmpy2.ceil(mpfr(x_max) / gmpy2.log(2))) + guard
    a = seq.exact(x_max)
    num, den = a.numerator, a.denominator
    k = max(num.bit_length() - den.bit_length() - 1, 0)
    while (den << k) < num:
        k += 1
    return k + guard


def _product_bits(seq, x, alpha, guard):
    return required_bits(seq, x, guard) + _alpha_bits(alpha) + 8


def frac_dilate(
    alpha: AlphaLike,
    seq: LacunarySequence,
    x: int,
    guard: int = DEFAULT_GUARD,
    x_max: Optional[int] = None,
) -> float:
    """{alpha * a(x)} as a double in [0, 1).

    Raises PrecisionBudgetError when ``x`` exceeds a configured ``x_max``.
    """
    a = as_alpha(alpha)
    if a <= 0:
        raise ValueError("alpha must be positive")
    if x_max is not None and x > x_max:
        raise PrecisionBudgetError(f"x = {x} beyond the configured budget x_max = {x_max}")
    bits = _product_bits(seq, x, a, guard)
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        t = mpfr(a) * seq.value(x, bits)
        f = t - gmpy2.floor(t)
    return _to_unit_double(f)


def _to_unit_double(f) -> float:
    th = float(f)
    # rounding a value within 2**-54 of 1 gives 1.0, which is the point 0
    return 0.0 if th >= 1.0 else th


def theta_table(
    alpha: AlphaLike,
    seq: LacunarySequence,
    N: int,
    guard: int = DEFAULT_GUARD,
    fixed: bool = False,
):
    """theta_x = {alpha a(x)} for x = 1..N as a read-only float64 array.

    With ``fixed=True`` also return floor(theta_x * 2**64) as uint64, which
    lets callers form {n alpha a(x)} = {n theta_x} exactly by wrapping
    integer multiplication.
    """
    a = as_alpha(alpha)
    if a <= 0:
        raise ValueError("alpha must be positive")
    if seq.length is not None and N > seq.length:
        raise SequenceError(f"custom table has {seq.length} entries, asked for N = {N}")
    bits = _product_bits(seq, N, a, guard)
    vals = seq.values(N, bits)
    out = np.empty(N, dtype=np.float64)
    fix = np.empty(N, dtype=np.uint64) if fixed else None
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        am = mpfr(a)
        floor = gmpy2.floor
        for i, v in enumerate(vals):
            t = am * v
            f = t - floor(t)
            out[i] = _to_unit_double(f)
            if fixed:
                fix[i] = int(floor(gmpy2.mul_2exp(f, 64))) & (TWO64 - 1)
    out.setflags(write=False)
    if fixed:
        fix.setflags(write=False)
        return out, fix
    return out


def exact_frac_rational(alpha: Fraction, value: Fraction) -> Fraction:
    """Exact {alpha * value} for rationals; the oracle for frac_dilate."""
    prod = alpha * value
    return prod - (prod.numerator // prod.denominator)
