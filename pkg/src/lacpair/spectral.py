"""The Fourier route to R2 and Monte Carlo moments over the dilation alpha.

Conventions: e(z) = exp(2 pi i z), f^(xi) = int f(x) e(-x xi) dx and

    S_{n,N}(alpha) = sum_{x != y <= N} e(alpha n (a(x) - a(y))) = |T_n|^2 - N,
    T_n = sum_{x <= N} e(n alpha a(x)).

Phases use {n alpha a(x)} = {n theta_x}; theta_x is held as a 64-bit
fixed-point word, so the reduction mod 1 is an exact wrapping product.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, stats

from ._parallel import parallel_map
from .paircorr import PoissonModel, WindowFunction, pair_count, r2_smooth
from .precision import DEFAULT_GUARD, PrecisionBudgetError, theta_table

__all__ = [
    "WeylSum",
    "WeightDensity",
    "MomentEstimate",
    "weyl_sum",
    "weyl_sums",
    "r2_fourier",
    "r2_fourier_fixed",
    "sample_alpha",
    "substream",
    "r2_statistic",
    "r2_samples",
    "expectation_mc",
    "variance_mc",
    "variance_fourier_tiny",
]

TWO_M53 = 2.0**-53
TINY_BUDGET = 10**9


# -- Weyl sums -----------------------------------------------------------------

@dataclass(frozen=True)
class WeylSum:
    n: int
    N: int
    value: complex


def _phases(fix: np.ndarray, n: int) -> np.ndarray:
    # {n theta} in [0, 1) from the wrapped product of 64-bit words
    u = np.uint64(n % (1 << 64)) * fix
    return (u >> np.uint64(11)).astype(np.float64) * TWO_M53


def _check_mode(n: int, guard: int) -> None:
    # fixed-point rounding contributes |n| 2**-64 and theta itself about
    # 2**-(guard - 11); keep the product of both below 2**-50 or so
    if abs(n) > 2 ** max(guard - 64, 0) * 2**14:
        raise PrecisionBudgetError(f"mode |n| = {abs(n)} too large for guard {guard}")


def weyl_sums(fix: np.ndarray, modes) -> np.ndarray:
    """S_{n,N} for each n in ``modes`` from a fixed-point theta table (real parts exact to rounding)."""
    fix = np.asarray(fix, dtype=np.uint64)
    N = fix.shape[0]
    out = np.empty(len(modes), dtype=np.complex128)
    for k, n in enumerate(modes):
        if n == 0:
            out[k] = N * N - N
            continue
        t = np.exp(2j * np.pi * _phases(fix, int(n))).sum()
        out[k] = (t.real * t.real + t.imag * t.imag) - N
    return out


def weyl_sum(alpha, seq, n: int, N: int, guard: int = DEFAULT_GUARD) -> WeylSum:
    """S_{n,N}(alpha) computed as |T_n|^2 - N."""
    _check_mode(n, guard)
    _, fix = theta_table(alpha, seq, N, guard, fixed=True)
    return WeylSum(int(n), N, complex(weyl_sums(fix, [n])[0]))


# -- Fourier reconstruction of R2 ----------------------------------------------

def r2_fourier_fixed(fix: np.ndarray, window: WindowFunction, cutoff: int) -> float:
    """(1/N^2) sum_{|n| <= cutoff} f^(n/N) S_{n,N}; S_{-n} = conj(S_n) folds the sum."""
    N = len(fix)
    modes = np.arange(1, cutoff + 1)
    S = weyl_sums(fix, modes).real
    fh = window.fourier(modes / N)
    total = window.fourier(0.0) * (N * N - N) + 2.0 * math.fsum(fh * S)
    return float(total) / (N * N)


def r2_fourier(alpha, seq, window: WindowFunction, N: int, cutoff: Optional[int] = None,
               guard: int = DEFAULT_GUARD):
    """R2 through the mode expansion, truncated at |n| <= cutoff (default 20N)."""
    from .paircorr import PairCorrEstimate

    if not window.has_fourier:
        raise ValueError(f"window {window.label()} has no usable Fourier transform")
    if N < 2:
        raise ValueError("need N >= 2")
    cutoff = 20 * N if cutoff is None else int(cutoff)
    if cutoff < 8 * N:
        raise ValueError(f"cutoff {cutoff} below 8N = {8 * N}")
    _check_mode(cutoff, guard)
    _, fix = theta_table(alpha, seq, N, guard, fixed=True)
    return PairCorrEstimate(r2_fourier_fixed(fix, window, cutoff), N, window, "fourier")


# -- weight density -------------------------------------------------------------

def _bump1(t: float) -> float:
    return math.exp(-1.0 / (1.0 - t * t)) if abs(t) < 1.0 else 0.0


def _bump(t):
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


class _BumpTransform:
    """psi^(eta) = int_{-1}^{1} exp(-1/(1-t^2)) cos(2 pi eta t) dt on Chebyshev panels.

    Node values come from the trapezoid rule on the full period, which is
    spectrally accurate for an integrand whose derivatives all vanish at the
    endpoints.  Past ``ETA_MAX`` the transform is below 1e-18 and is zero.
    """

    NODES = 8192
    WIDTH = 0.5
    DEG = 24
    ETA_MAX = 200.0

    def __init__(self):
        m = self.NODES
        self._t = -1.0 + 2.0 * np.arange(m) / m
        self._w = _bump(self._t) * (2.0 / m)
        npan = int(math.ceil(self.ETA_MAX / self.WIDTH))
        k = np.arange(self.DEG + 1)
        x = np.cos(np.pi * (k + 0.5) / (self.DEG + 1))  # Chebyshev points of the first kind
        coef = np.empty((npan, self.DEG + 1))
        for p in range(npan):
            eta = (p + 0.5 * (x + 1.0)) * self.WIDTH
            coef[p] = np.polynomial.chebyshev.chebfit(x, self.direct(eta), self.DEG)
        self.coef = coef

    def direct(self, eta):
        eta = np.atleast_1d(np.asarray(eta, dtype=np.float64))
        return np.cos(2.0 * np.pi * np.outer(eta, self._t)) @ self._w

    def __call__(self, eta):
        eta = np.abs(np.asarray(eta, dtype=np.float64))
        shape = eta.shape
        eta = eta.ravel()
        out = np.zeros_like(eta)
        live = eta < self.ETA_MAX
        e = eta[live]
        idx = np.minimum((e / self.WIDTH).astype(np.int64), self.coef.shape[0] - 1)
        u = 2.0 * (e / self.WIDTH - idx) - 1.0
        # Clenshaw recurrence with per-point coefficient rows
        b1 = np.zeros_like(u)
        b2 = np.zeros_like(u)
        for k in range(self.DEG, 0, -1):
            b1, b2 = 2.0 * u * b1 - b2 + self.coef[idx, k], b1
        out[live] = u * b1 - b2 + self.coef[idx, 0]
        return out.reshape(shape)


_PSI_HAT: Optional[_BumpTransform] = None


def _psi_hat() -> _BumpTransform:
    global _PSI_HAT
    if _PSI_HAT is None:
        _PSI_HAT = _BumpTransform()
    return _PSI_HAT


@dataclass(frozen=True)
class WeightDensity:
    """Normalised bump exp(-1/(1-t^2)) moved to [lo, hi]."""

    lo: float = 1.0
    hi: float = 2.0

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.hi > self.lo):
            raise ValueError(f"bad support [{self.lo}, {self.hi}]")

    @classmethod
    def parse(cls, text: str) -> "WeightDensity":
        lo, _, hi = text.partition(",")
        return cls(float(lo), float(hi))

    @property
    def center(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.hi - self.lo)

    @cached_property
    def z(self) -> float:
        """int_{-1}^{1} exp(-1/(1-t^2)) dt."""
        v, _ = integrate.quad(_bump1, 0.0, 1.0, epsabs=1e-15, epsrel=1e-13, limit=200)
        return 2.0 * v

    def pdf(self, alpha):
        h = self.half_width
        return _bump((np.asarray(alpha, dtype=np.float64) - self.center) / h) / (h * self.z)

    def normalization(self) -> float:
        v, _ = integrate.quad(lambda a: float(self.pdf(a)), self.lo, self.hi,
                              epsabs=1e-13, epsrel=1e-12, limit=200)
        return v

    def fourier(self, xi):
        """rho^(xi) = e(-c xi) psi^(h xi) / Z, tabulated on Chebyshev panels."""
        xi = np.asarray(xi, dtype=np.float64)
        return np.exp(-2j * np.pi * self.center * xi) * self.fourier_modulus(xi)

    def fourier_modulus(self, xi):
        """The real, even factor psi^(h xi) / Z of rho^."""
        return _psi_hat()(self.half_width * np.asarray(xi, dtype=np.float64)) / self.z

    def fourier_quad(self, xi: float) -> complex:
        """rho^(xi) by adaptive oscillatory quadrature; the reference for ``fourier``."""
        eta = self.half_width * xi
        if eta == 0.0:
            v = self.z
        else:
            v, _ = integrate.quad(_bump1, 0.0, 1.0, weight="cos", wvar=2.0 * math.pi * abs(eta), limit=400,
                                  epsabs=1e-15)
            v *= 2.0
        return complex(np.exp(-2j * np.pi * self.center * xi) * v / self.z)


def substream(seed: int, k: int) -> np.random.Generator:
    """Independent generator for sample ``k``; fixed by (seed, k) alone."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(k)])))


def aux_stream(seed: int, tag: int) -> np.random.Generator:
    """Generator for resampling work; a spawn key keeps it apart from every sample stream."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(tag),))))


def sample_alpha(rho: WeightDensity, rng: np.random.Generator) -> float:
    """One draw from rho by rejection from the uniform law on [lo, hi]."""
    h, c = rho.half_width, rho.center
    while True:
        t = 2.0 * rng.random() - 1.0
        # acceptance exp(1 - 1/(1 - t^2)) = psi(t) / psi(0)
        if abs(t) < 1.0 and rng.random() < math.exp(1.0 - 1.0 / (1.0 - t * t)):
            a = c + h * t
            if rho.lo < a < rho.hi:
                return a


# -- Monte Carlo --------------------------------------------------------------

@dataclass(frozen=True)
class MomentEstimate:
    """Monte Carlo summary.  ``stderr`` is sample-stddev / sqrt(samples) of R2.

    ``variance`` is the sample variance for ``expect`` runs and the second
    moment about the target for ``variance`` runs; ``ci`` is a 95% interval
    for the headline quantity of the run.
    """

    mean: float
    variance: float
    stderr: float
    samples: int
    seed: int
    ci: tuple = (math.nan, math.nan)
    values: np.ndarray = field(default=None, repr=False, compare=False)
    var_stderr: float = math.nan


def r2_statistic(points, window: WindowFunction) -> float:
    """R2 for one point set: exact pair count for indicators, smoothed sum otherwise."""
    if window.kind == "indicator":
        return pair_count(points, window.param, "sorted") / len(points)
    return r2_smooth(points, window).value


def r2_samples(seq, window: WindowFunction, Ns: Sequence[int], rho: WeightDensity,
               samples: int, seed: int, guard: int = DEFAULT_GUARD,
               alphas: Optional[Sequence] = None) -> np.ndarray:
    """R2 for each sample (rows) and each N (columns).

    Sample k draws alpha from ``substream(seed, k)`` (or uses ``alphas[k]``)
    and every N reuses the prefix of one theta table, so the columns are
    paired.  ``seq`` may be a ``PoissonModel`` for the random reference.
    """
    Ns = [int(n) for n in Ns]
    if min(Ns) < 2:
        raise ValueError("need N >= 2")
    top = max(Ns)

    def one(k):
        rng = substream(seed, k)
        if isinstance(seq, PoissonModel):
            th = seq.points(top, rng)
        else:
            a = sample_alpha(rho, rng) if alphas is None else alphas[k]
            th = theta_table(a, seq, top, guard)
        return [r2_statistic(th[:n], window) for n in Ns]

    return np.array(parallel_map(one, range(samples)), dtype=np.float64).reshape(samples, len(Ns))


def _summary(values: np.ndarray, seed: int) -> tuple:
    n = values.size
    mean = float(np.mean(values))
    var = float(np.var(values, ddof=1)) if n > 1 else 0.0
    return mean, var, math.sqrt(var / n)


def expectation_mc(seq, window: WindowFunction, N: int, rho: Optional[WeightDensity] = None,
                   samples: int = 200, seed: int = 0, guard: int = DEFAULT_GUARD) -> MomentEstimate:
    """Mean of R2(f, N)(alpha) over alpha ~ rho, with its standard error."""
    if samples < 30:
        raise ValueError("expectation_mc needs at least 30 samples")
    rho = rho or WeightDensity()
    vals = r2_samples(seq, window, [N], rho, samples, seed, guard)[:, 0]
    mean, var, se = _summary(vals, seed)
    return MomentEstimate(mean, var, se, samples, seed, (mean - 1.96 * se, mean + 1.96 * se), vals)


def variance_mc(seq, window: WindowFunction, N: int, rho: Optional[WeightDensity] = None,
                samples: int = 200, seed: int = 0, guard: int = DEFAULT_GUARD,
                target: Optional[float] = None, values: Optional[np.ndarray] = None,
                n_boot: int = 2000) -> MomentEstimate:
    """Second moment of R2 about ``target`` (default int f), with a bootstrap CI."""
    if samples < 100:
        raise ValueError("variance_mc needs at least 100 samples")
    rho = rho or WeightDensity()
    target = window.integral if target is None else target
    if values is None:
        values = r2_samples(seq, window, [N], rho, samples, seed, guard)[:, 0]
    dev2 = (values - target) ** 2
    second = float(np.mean(dev2))
    mean, _, se = _summary(values, seed)
    var_se = float(np.std(dev2, ddof=1) / math.sqrt(dev2.size))
    if np.ptp(dev2) == 0.0:
        ci = (second, second)
    else:
        res = stats.bootstrap((dev2,), np.mean, n_resamples=n_boot, confidence_level=0.95,
                              method="percentile", random_state=aux_stream(seed, 1))
        ci = (float(res.confidence_interval.low), float(res.confidence_interval.high))
    return MomentEstimate(mean, second, se, samples, seed, ci, values, var_se)


# -- tiny-N Fourier variance ---------------------------------------------------

@dataclass(frozen=True)
class TinyVariance:
    """Truncated mode double sum over (n1, n2) != (0, 0) with |n_i| <= M.

    The sum equals <R_M^2> - Z^2, where R_M is R2 truncated to |n| <= M and
    Z = f^(0)(N - 1)/N is its zero mode.  ``tail_bound`` bounds the change
    from restoring the modes |n| > M.
    """

    value: float
    N: int
    M: int
    zero_mode: float
    tail_bound: float


def variance_fourier_tiny(seq, window: WindowFunction, N: int, M: int,
                          rho: Optional[WeightDensity] = None) -> TinyVariance:
    """(1/N^4) sum_{(n1,n2) != 0, |n_i| <= M} f^(n1/N) f^(n2/N) w(n1, n2, N)."""
    if not window.has_fourier:
        raise ValueError(f"window {window.label()} has no usable Fourier transform")
    if N > 16 or M > 64:
        raise ValueError("variance_fourier_tiny is limited to N <= 16, M <= 64")
    if (2 * M + 1) ** 2 * N**4 > TINY_BUDGET:
        raise PrecisionBudgetError("mode box too large")
    rho = rho or WeightDensity()
    a = np.array([float(v) for v in seq.values(N, 128)])
    d = (a[None, :] - a[:, None])[~np.eye(N, dtype=bool)]  # a(x3) - a(x1), x1 != x3
    modes = np.arange(-M, M + 1)
    fh = window.fourier(modes / N)
    c, h = rho.center, rho.half_width
    psi = _psi_hat()
    total = 0.0
    for i, n1 in enumerate(modes):
        if fh[i] == 0.0:
            continue
        u = n1 * d  # n1 (a(x3) - a(x1))
        v = modes[:, None] * d[None, :]  # n2 (a(x4) - a(x2))
        t = u[None, :, None] - v[:, None, :]
        # the index set is closed under t -> -t, so only Re rho^ survives
        w = np.cos(2.0 * np.pi * c * t) * psi(h * t)
        wsum = w.sum(axis=(1, 2)) / rho.z
        if n1 == 0:
            wsum[M] = 0.0  # the origin
        total += fh[i] * math.fsum(fh * wsum)
    zero = float(window.fourier(0.0)) * (N - 1) / N
    return TinyVariance(total / N**4, N, M, zero, _tail_bound(window, N, M, zero))


def _tail_bound(window: WindowFunction, N: int, M: int, zero: float) -> float:
    # |R2 - R_M| <= b := ((N-1)/N) sum_{|n| > M} |f^(n/N)|, and |R_M| <= Z + b_M
    # with b_M the same sum over 1 <= |n| <= M; so |<R2^2> - <R_M^2>| <= 2 (Z + b_M) b + b^2
    n = np.arange(1, M + 1)
    bM = 2.0 * float(np.sum(np.abs(window.fourier(n / N)))) * (N - 1) / N
    b = window.fourier_tail(M / N) * N * (N - 1) / N
    return 2.0 * (zero + bM) * b + b * b
