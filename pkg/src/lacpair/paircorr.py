"""Pair correlation R2 of points on the circle R/Z.

For points theta_1..theta_N and an even test function f,

    R2(f, N) = (1/N) sum_{m != n} F_N(theta_n - theta_m),
    F_N(x)   = sum_{j in Z} f(N (x + j)).

With f the indicator of (-s/2, s/2) this counts ordered pairs at circle
distance strictly below s/(2N).
"""
from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import kernels

__all__ = [
    "WindowFunction",
    "PairCorrEstimate",
    "PoissonModel",
    "circle_dist",
    "pair_count",
    "r2_window",
    "r2_smooth",
    "dilated_points",
    "MonotonicityCheck",
    "monotonicity_check",
]

# Gaussian profile exp(-x^2/2 sigma^2) drops below 1e-17 past this many sigmas
GAUSS_CUT = math.sqrt(2.0 * math.log(1e17))
_KIND_CODE = {"indicator": 0, "triangle": 1, "gaussian": 2}


@dataclass(frozen=True)
class WindowFunction:
    """Test function f with its integral and, where known, its transform.

    ``param`` is the width s for ``indicator`` and ``triangle`` and sigma for
    ``gaussian``.  ``custom`` windows wrap a vectorised callable with a
    declared half-support; they are not assumed even.
    """

    kind: str
    param: float
    func: Optional[Callable] = field(default=None, compare=False, repr=False)
    support_: float = 0.0
    integral_: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("indicator", "triangle", "gaussian", "custom"):
            raise ValueError(f"unknown window kind {self.kind!r}")
        if self.kind != "custom" and not (self.param > 0 and math.isfinite(self.param)):
            raise ValueError(f"window parameter must be positive, got {self.param}")
        if self.kind == "custom" and (self.func is None or not self.support_ > 0):
            raise ValueError("custom windows need a callable and a positive support")

    # -- constructors -------------------------------------------------------
    @classmethod
    def indicator(cls, s: float) -> "WindowFunction":
        return cls("indicator", float(s))

    @classmethod
    def triangle(cls, s: float) -> "WindowFunction":
        return cls("triangle", float(s))

    @classmethod
    def gaussian(cls, sigma: float) -> "WindowFunction":
        return cls("gaussian", float(sigma))

    @classmethod
    def custom(cls, func, support: float, integral: Optional[float] = None) -> "WindowFunction":
        return cls("custom", 0.0, func=func, support_=float(support), integral_=integral)

    @classmethod
    def parse(cls, text: str) -> "WindowFunction":
        """``indicator:1.0``, ``triangle:1.0`` or ``gaussian:0.5``."""
        kind, sep, val = text.strip().partition(":")
        if kind not in _KIND_CODE or not sep:
            raise ValueError(f"bad window spec {text!r}")
        try:
            p = float(val)
        except ValueError as exc:
            raise ValueError(f"bad window parameter in {text!r}") from exc
        return cls(kind, p)

    # -- analytic data ------------------------------------------------------
    @property
    def code(self) -> int:
        return _KIND_CODE.get(self.kind, -1)

    @property
    def integral(self) -> float:
        if self.kind in ("indicator", "triangle"):
            return self.param
        if self.kind == "gaussian":
            return self.param * math.sqrt(2.0 * math.pi)
        if self.integral_ is None:
            raise ValueError("custom window has no declared integral")
        return self.integral_

    @property
    def support(self) -> float:
        """Half-width beyond which f is zero (or below 1e-17 for the Gaussian)."""
        if self.kind == "indicator":
            return 0.5 * self.param
        if self.kind == "triangle":
            return self.param
        if self.kind == "gaussian":
            return GAUSS_CUT * self.param
        return self.support_

    @property
    def is_even(self) -> bool:
        return self.kind != "custom"

    @property
    def has_fourier(self) -> bool:
        """True when the closed-form transform decays fast enough for truncation."""
        return self.kind in ("triangle", "gaussian")

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "indicator":
            return (np.abs(x) < 0.5 * self.param).astype(np.float64)
        if self.kind == "triangle":
            return np.maximum(0.0, 1.0 - np.abs(x) / self.param)
        if self.kind == "gaussian":
            return np.exp(-0.5 * (x / self.param) ** 2)
        return np.asarray(self.func(x), dtype=np.float64)

    def fourier(self, xi):
        """f^(xi) = int f(x) e(-x xi) dx."""
        xi = np.asarray(xi, dtype=np.float64)
        s = self.param
        if self.kind == "indicator":
            return s * np.sinc(s * xi)
        if self.kind == "triangle":
            return s * np.sinc(s * xi) ** 2
        if self.kind == "gaussian":
            return s * math.sqrt(2.0 * math.pi) * np.exp(-2.0 * math.pi**2 * s * s * xi * xi)
        raise ValueError("custom windows carry no closed-form transform")

    def fourier_tail(self, xi0: float) -> float:
        """B with sum_{|n| > xi0 N} |f^(n/N)| <= N B, by comparison with the integral."""
        s = self.param
        if not xi0 > 0:
            return math.inf
        if self.kind == "triangle":
            # s sinc^2(s xi) <= 1/(pi^2 s xi^2); integral comparison for the tail
            return 2.0 / (math.pi**2 * s * xi0)
        if self.kind == "gaussian":
            a = 2.0 * math.pi**2 * s * s
            return 2.0 * s * math.sqrt(2.0 * math.pi) * math.exp(-a * xi0 * xi0) / (2.0 * a * xi0)
        return math.inf

    def label(self) -> str:
        if self.kind == "custom":
            return "custom"
        return f"{self.kind}:{self.param:g}"


@dataclass(frozen=True)
class PairCorrEstimate:
    value: float
    N: int
    window: WindowFunction
    algorithm: str
    count: Optional[int] = None  # ordered pair count for hard windows


def circle_dist(a, b):
    """Distance on R/Z between points of [0, 1): min(|a - b|, 1 - |a - b|)."""
    d = np.abs(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64))
    out = np.minimum(d, 1.0 - d)
    return float(out) if out.ndim == 0 else out


def _as_points(points) -> np.ndarray:
    th = np.ascontiguousarray(points, dtype=np.float64)
    if th.ndim != 1:
        raise ValueError("points must be one-dimensional")
    if th.size and (th.min() < 0.0 or th.max() >= 1.0):
        raise ValueError("points must lie in [0, 1)")
    return th


def pair_count(points, s: float, algorithm: str = "sorted") -> int:
    """Ordered pairs m != n with circle distance < s/(2N)."""
    th = _as_points(points)
    N = th.size
    if N < 2:
        raise ValueError("need at least two points")
    h = s / (2.0 * N)
    if not s > 0:
        raise ValueError("window width must be positive")
    if h > 0.5:
        raise ValueError(f"window half-width s/(2N) = {h:g} exceeds 1/2")
    if algorithm == "direct":
        return int(kernels.count_pairs_direct(th, h))
    if algorithm == "sorted":
        return int(kernels.count_pairs_sorted(th, h))
    raise ValueError(f"unknown algorithm {algorithm!r}")


def r2_window(points, s: float, algorithm: str = "sorted") -> PairCorrEstimate:
    """R2 for the indicator of (-s/2, s/2); ``direct`` is the O(N^2) oracle."""
    c = pair_count(points, s, algorithm)
    N = len(points)
    return PairCorrEstimate(c / N, N, WindowFunction.indicator(s), algorithm, c)


def r2_smooth(points, window: WindowFunction) -> PairCorrEstimate:
    """(1/N) sum_{m != n} F_N(theta_n - theta_m) for a general window."""
    th = _as_points(points)
    N = th.size
    if N < 2:
        raise ValueError("need at least two points")
    if window.is_even:
        total = kernels.smooth_sum_sorted(th, N, window.code, window.param, window.support)
    else:
        total = _smooth_direct(th, window)
    return PairCorrEstimate(float(total) / N, N, window, "smooth")


def _smooth_direct(th: np.ndarray, window: WindowFunction) -> float:
    # pairs m < n contribute F(d) + F(-d); an odd f cancels exactly
    N = th.size
    J = int(math.ceil(window.support / N)) + 1
    js = np.arange(-J, J + 1, dtype=np.float64)
    total = 0.0
    for m in range(N - 1):
        d = th[m + 1:] - th[m]
        x = N * (d[:, None] + js[None, :])
        total += float(np.sum(window(x) + window(-x)))
    return total


@dataclass(frozen=True)
class MonotonicityCheck:
    """The three sides of the nested-prefix sandwich, as exact rationals."""

    lower: Fraction
    middle: Fraction
    upper: Fraction

    @property
    def holds(self) -> bool:
        return self.lower <= self.middle <= self.upper


def monotonicity_check(points, n_small: int, n: int, n_large: int, s: float,
                       eps: float, algorithm: str = "sorted") -> MonotonicityCheck:
    """Compare R2(I_s, n) with its neighbours on the prefixes of ``points``.

    Needs n_small < n < (1 + eps) n_small and (1 - eps) n_large < n < n_large.
    The sides are (1 - eps) R2(I_{(1-eps)s}, n_small), R2(I_s, n) and
    R2(I_{s/(1-eps)}, n_large) / (1 - eps), built from integer pair counts.
    """
    th = _as_points(points)
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if not (n_small < n < (1.0 + eps) * n_small and (1.0 - eps) * n_large < n < n_large):
        raise ValueError("prefix lengths violate the nesting hypothesis")
    if n_large > th.size:
        raise ValueError("not enough points for the largest prefix")
    e = Fraction(eps)
    c_lo = pair_count(th[:n_small], (1.0 - eps) * s, algorithm)
    c_mid = pair_count(th[:n], s, algorithm)
    c_hi = pair_count(th[:n_large], s / (1.0 - eps), algorithm)
    return MonotonicityCheck((1 - e) * Fraction(c_lo, n_small), Fraction(c_mid, n),
                             Fraction(c_hi, n_large) / (1 - e))


def dilated_points(alpha, seq, N: int, guard: Optional[int] = None) -> np.ndarray:
    """theta_x = {alpha a(x)}, x = 1..N."""
    from .precision import DEFAULT_GUARD, theta_table

    return theta_table(alpha, seq, N, DEFAULT_GUARD if guard is None else guard)


class PoissonModel:
    """N independent uniform points on [0, 1); the random reference model."""

    name = "poisson"
    is_rational = False

    def points(self, N: int, rng: np.random.Generator) -> np.ndarray:
        return rng.random(N)

    def __str__(self) -> str:
        return self.name
