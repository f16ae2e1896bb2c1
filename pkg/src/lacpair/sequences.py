"""Lacunary sequences a(x), x = 1, 2, ..., and their pairwise gaps.

Three kinds are supported:

* ``geometric``: a(x) = r**x with r an exact rational (``"3/2"``, ``"1.5"``);
* ``exp``: a(x) = e**x;
* ``custom``: a table of decimal strings, a(k) on the k-th entry.

Values are produced as ``gmpy2.mpfr`` numbers at a caller-chosen bit budget.
Rational-valued kinds (geometric, custom) also expose exact ``Fraction``
values so that threshold decisions downstream can be made exactly.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence, Union

import gmpy2
from gmpy2 import mpfr, mpq, mpz

__all__ = [
    "SequenceError",
    "NotLacunaryWarning",
    "LacunarySequence",
    "GapValue",
    "RatioReport",
    "parse_rational",
    "value_at",
    "gap",
    "verify_lacunary",
    "load_custom",
    "parse_sequence",
]

MIN_BITS = 64


class SequenceError(ValueError):
    """Bad sequence definition or evaluation request."""


class NotLacunaryWarning(UserWarning):
    """A custom table is distinct and increasing but not lacunary."""


def parse_rational(text: Union[str, int, Fraction]) -> Fraction:
    """Parse ``"3/2"``, ``"1.5"``, ``"2"`` or ``"1e-3"`` into an exact Fraction.

    Floats are rejected on purpose: user data must not pass through double
    precision.
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        raise TypeError("pass decimal strings, not floats, to keep values exact")
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise SequenceError(f"not a decimal or rational literal: {text!r}") from exc


def _ctx(bits: int):
    return gmpy2.context(gmpy2.get_context(), precision=bits)


@dataclass(frozen=True)
class LacunarySequence:
    """Immutable description of a positive, increasing sequence a(x), x >= 1.

    ``claimed_ratio`` is the growth constant C with a(x+1) >= C a(x).  It is
    fixed to the ratio for geometric sequences and to e for ``exp``; custom
    tables carry whatever the caller claims (``None`` means uncertified).
    """

    kind: str
    ratio: Optional[Fraction] = None
    table: tuple = ()
    claimed_ratio: Optional[Fraction] = None
    name: str = ""
    _exact: tuple = field(default=(), repr=False, compare=False)

    # -- constructors -----------------------------------------------------
    @classmethod
    def geometric(cls, ratio) -> "LacunarySequence":
        r = parse_rational(ratio)
        if r <= 1:
            raise SequenceError(f"geometric ratio must exceed 1, got {r}")
        return cls("geometric", ratio=r, claimed_ratio=r, name=f"geometric:{_fmt(r)}")

    @classmethod
    def exponential(cls) -> "LacunarySequence":
        # C = e; kept symbolic, see claimed_ratio_mpfr
        return cls("exp", name="exp")

    @classmethod
    def custom(cls, values: Sequence, claimed_ratio=None, name: str = "custom") -> "LacunarySequence":
        strings = tuple(str(v).strip() for v in values)
        if not strings:
            raise SequenceError("custom table is empty")
        exact = tuple(parse_rational(s) for s in strings)
        for k, v in enumerate(exact, start=1):
            if v <= 0:
                raise SequenceError(f"non-positive table entry a({k}) = {strings[k - 1]}")
        for k in range(1, len(exact)):
            if exact[k] <= exact[k - 1]:
                raise SequenceError(
                    f"table not strictly increasing at a({k}) = {strings[k - 1]}, "
                    f"a({k + 1}) = {strings[k]}"
                )
        claim = None if claimed_ratio is None else parse_rational(claimed_ratio)
        if claim is not None and claim <= 1:
            raise SequenceError("claimed ratio must exceed 1")
        if len(exact) > 1:
            min_ratio = min(exact[k + 1] / exact[k] for k in range(len(exact) - 1))
            if claim is None:
                warnings.warn(
                    f"custom table {name!r} carries no lacunarity certificate "
                    f"(min consecutive ratio {float(min_ratio):.6g})",
                    NotLacunaryWarning,
                    stacklevel=2,
                )
        return cls("custom", table=strings, claimed_ratio=claim, name=name, _exact=exact)

    # -- properties ---------------------------------------------------------
    @property
    def is_rational(self) -> bool:
        """True when every a(x) is an exact rational number."""
        return self.kind in ("geometric", "custom")

    @property
    def certified(self) -> bool:
        return self.kind in ("geometric", "exp") or self.claimed_ratio is not None

    @property
    def length(self) -> Optional[int]:
        """Number of available terms (``None`` for infinite sequences)."""
        return len(self.table) if self.kind == "custom" else None

    def claimed_ratio_mpfr(self, bits: int = 128) -> mpfr:
        with _ctx(bits):
            if self.kind == "exp":
                return gmpy2.exp(mpfr(1))
            if self.claimed_ratio is None:
                raise SequenceError(f"sequence {self.name} is not certified lacunary")
            return mpfr(mpq(self.claimed_ratio.numerator, self.claimed_ratio.denominator))

    def log_ratio(self) -> float:
        """Natural log of the claimed ratio C."""
        if self.kind == "exp":
            return 1.0
        if self.claimed_ratio is None:
            raise SequenceError(f"sequence {self.name} is not certified lacunary")
        c = self.claimed_ratio
        return math.log(c.numerator) - math.log(c.denominator)

    def _check_index(self, x: int) -> None:
        if x < 1:
            raise SequenceError(f"indices are 1-based, got x = {x}")
        if self.kind == "custom" and x > len(self.table):
            raise SequenceError(f"custom table has {len(self.table)} entries, asked for a({x})")

    # -- values -----------------------------------------------------------
    def exact(self, x: int) -> Fraction:
        """Exact rational a(x); raises for ``exp``."""
        self._check_index(x)
        if self.kind == "geometric":
            r = self.ratio
            return Fraction(r.numerator**x, r.denominator**x)
        if self.kind == "custom":
            return self._exact[x - 1]
        raise SequenceError("e**x is not rational")

    def value(self, x: int, bits: int = 128) -> mpfr:
        """a(x) as an mpfr with ``bits`` of precision (relative error <= 2**(2 - bits))."""
        if bits < MIN_BITS:
            raise SequenceError(f"need at least {MIN_BITS} bits, got {bits}")
        self._check_index(x)
        with _ctx(bits):
            if self.kind == "geometric":
                r = self.ratio
                # two roundings on exact integers plus one division
                return mpfr(mpz(r.numerator) ** x) / mpfr(mpz(r.denominator) ** x)
            if self.kind == "exp":
                return gmpy2.exp(mpfr(x))
            return mpfr(self.table[x - 1])

    def values(self, n: int, bits: int) -> tuple:
        """a(1), ..., a(n) at ``bits`` precision; cached per (sequence, n, bits)."""
        return _values_cached(self, n, bits)

    def exact_values(self, n: int) -> tuple:
        return _exact_cached(self, n)

    def __str__(self) -> str:
        return self.name


@lru_cache(maxsize=32)
def _values_cached(seq: LacunarySequence, n: int, bits: int) -> tuple:
    if seq.kind == "geometric":
        r = seq.ratio
        p, q = mpz(r.numerator), mpz(r.denominator)
        out = []
        pp, qq = mpz(1), mpz(1)
        with _ctx(bits):
            for _ in range(n):
                pp *= p
                qq *= q
                out.append(mpfr(pp) / mpfr(qq))
        return tuple(out)
    return tuple(seq.value(x, bits) for x in range(1, n + 1))


@lru_cache(maxsize=32)
def _exact_cached(seq: LacunarySequence, n: int) -> tuple:
    return tuple(seq.exact(x) for x in range(1, n + 1))


def _fmt(r: Fraction) -> str:
    return str(r.numerator) if r.denominator == 1 else f"{r.numerator}/{r.denominator}"


@dataclass(frozen=True)
class GapValue:
    x: int
    y: int
    value: mpfr  # a(x) - a(y)


@dataclass(frozen=True)
class RatioReport:
    min_ratio: float
    argmin: int
    claimed_ratio: Optional[float]
    passed: bool
    N: int


def value_at(seq: LacunarySequence, x: int, bits: int = 128) -> mpfr:
    return seq.value(x, bits)


def gap(seq: LacunarySequence, x: int, y: int, bits: int = 128) -> GapValue:
    """a(x) - a(y) at ``bits`` precision.

    For rational sequences the difference is formed exactly and rounded once.
    """
    if x == y:
        raise SequenceError("gap with x == y is excluded")
    seq._check_index(x)
    seq._check_index(y)
    with _ctx(bits):
        if seq.is_rational:
            d = seq.exact(x) - seq.exact(y)
            val = mpfr(mpq(d.numerator, d.denominator))
        else:
            # a(y)/a(x) <= 1/C keeps cancellation bounded; add headroom anyway
            hi = bits + 2 * abs(x - y).bit_length() + 8
            val = mpfr(seq.value(x, hi) - seq.value(y, hi))
    return GapValue(x, y, val)


def verify_lacunary(seq: LacunarySequence, N: int) -> RatioReport:
    """Minimal consecutive ratio a(x+1)/a(x) over the first N terms."""
    if N < 2:
        raise SequenceError("need N >= 2")
    if seq.kind == "custom" and N > len(seq.table):
        raise SequenceError(f"custom table has {len(seq.table)} entries, asked for N = {N}")
    if seq.is_rational:
        vals = seq.exact_values(N)
        ratios = [vals[k + 1] / vals[k] for k in range(N - 1)]
    else:
        vals = seq.values(N, 128)
        ratios = [vals[k + 1] / vals[k] for k in range(N - 1)]
    k = min(range(N - 1), key=lambda i: ratios[i])
    worst = ratios[k]
    claim = seq.claimed_ratio
    if seq.kind == "exp":
        ok = worst > 1  # ratios are e up to rounding
        claim_f = math.e
    elif claim is None:
        ok = False
        claim_f = None
    else:
        ok = worst > 1 and worst >= claim
        claim_f = float(claim)
    return RatioReport(float(worst), k + 1, claim_f, bool(ok), N)


def load_custom(path: Union[str, Path], claimed_ratio=None) -> LacunarySequence:
    """Read one decimal literal per line; ``#`` lines and blank lines are skipped."""
    p = Path(path)
    values = []
    for raw in p.read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        values.append(line)
    return LacunarySequence.custom(values, claimed_ratio=claimed_ratio, name=f"custom:{p}")


def parse_sequence(spec: str) -> LacunarySequence:
    """Parse the sequence mini-grammar: ``geometric:<ratio>``, ``exp``, ``custom:<path>``.

    A custom path may carry a claimed ratio after a second colon-free suffix,
    ``custom:<path>@<ratio>``.
    """
    spec = spec.strip()
    if spec == "exp":
        return LacunarySequence.exponential()
    kind, sep, rest = spec.partition(":")
    if not sep or not rest:
        raise SequenceError(f"bad sequence spec {spec!r}")
    if kind == "geometric":
        return LacunarySequence.geometric(rest)
    if kind == "custom":
        path, _, claim = rest.partition("@")
        return load_custom(path, claimed_ratio=claim or None)
    raise SequenceError(f"unknown sequence kind {kind!r}")
