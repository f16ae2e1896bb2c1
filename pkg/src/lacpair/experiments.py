"""Desk-scale runs of R2 along growing N, with log-log slope fits."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpz

from ._parallel import parallel_map
from .paircorr import PoissonModel, WindowFunction
from .precision import DEFAULT_GUARD, theta_table
from .sequences import parse_rational
from .spectral import WeightDensity, aux_stream, r2_samples, r2_statistic, substream

__all__ = [
    "ExperimentPlan",
    "SeriesReport",
    "DecayFit",
    "subsequence_grid",
    "convergence_scan",
    "variance_series",
    "decay_fit",
]


def subsequence_grid(delta, m_max: int) -> list:
    """Sorted distinct floor(m**(2/delta)) for m = 1..m_max, computed exactly."""
    d = parse_rational(str(delta)) if isinstance(delta, float) else parse_rational(delta)
    if d <= 0:
        raise ValueError("delta must be positive")
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    e = Fraction(2) / d
    p, q = e.numerator, e.denominator
    out = sorted({int(gmpy2.iroot(mpz(m) ** p, q)[0]) for m in range(1, m_max + 1)})
    return out


@dataclass(frozen=True)
class ExperimentPlan:
    """What to run.  ``alpha`` pins the dilation; otherwise samples are drawn.

    ``alpha_range`` gives uniform draws, ``rho`` draws from the bump weight.
    """

    seq: object
    window: WindowFunction
    grid: tuple = ()
    delta: Optional[Fraction] = None
    m_max: Optional[int] = None
    alpha: Optional[object] = None
    alpha_range: tuple = (1.0, 2.0)
    rho: Optional[WeightDensity] = None
    samples: int = 1
    seed: int = 0
    guard: int = DEFAULT_GUARD

    def __post_init__(self):
        grid = tuple(int(n) for n in self.grid)
        if not grid:
            if self.delta is None or self.m_max is None:
                raise ValueError("give an N grid or (delta, m_max)")
            # R2 needs two points; N_1 = 1 is skipped
            grid = tuple(n for n in subsequence_grid(self.delta, self.m_max) if n >= 2)
        if not grid or grid[0] < 2:
            raise ValueError("N grid needs entries >= 2")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("N grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        lo, hi = self.alpha_range
        if not hi > lo:
            raise ValueError("alpha range must have lo < hi")

    def draw_alpha(self, k: int):
        if self.alpha is not None:
            return self.alpha
        rng = substream(self.seed, k)
        if self.rho is not None:
            from .spectral import sample_alpha

            return sample_alpha(self.rho, rng)
        lo, hi = self.alpha_range
        return lo + (hi - lo) * rng.random()


@dataclass
class SeriesReport:
    """Rows of per-N results; ``matrix`` keeps per-sample values when paired."""

    columns: tuple
    rows: list
    matrix: Optional[np.ndarray] = field(default=None, repr=False)
    grid: tuple = ()
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        k = self.columns.index(name)
        return np.array([r[k] for r in self.rows], dtype=np.float64)

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        for r in self.rows:
            lines.append(",".join(_fmt(v) for v in r))
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _alpha_label(a) -> str:
    if a is None:
        return "nan"
    if isinstance(a, float):
        return repr(a)
    return str(a)


def convergence_scan(plan: ExperimentPlan) -> SeriesReport:
    """R2(window, N)(alpha) for every N in the grid and every alpha sample.

    Rows are (N, alpha, value, abs_dev) with abs_dev = |value - int f|,
    ordered by sample then N.  The samples share one theta table per alpha.
    """
    grid = plan.grid
    top = grid[-1]
    target = plan.window.integral
    poisson = isinstance(plan.seq, PoissonModel)

    def one(k):
        if poisson:
            th = plan.seq.points(top, substream(plan.seed, k))
            a = None
        else:
            a = plan.draw_alpha(k)
            th = theta_table(a, plan.seq, top, plan.guard)
        return a, [r2_statistic(th[:n], plan.window) for n in grid]

    results = parallel_map(one, range(plan.samples))
    rows = []
    mat = np.empty((plan.samples, len(grid)))
    for k, (a, vals) in enumerate(results):
        mat[k] = vals
        for n, v in zip(grid, vals):
            rows.append((n, _alpha_label(a), float(v), abs(float(v) - target)))
    return SeriesReport(("N", "alpha", "value", "abs_dev"), rows, mat, grid,
                        {"seed": plan.seed, "samples": plan.samples})


def variance_series(seq, window: WindowFunction, grid: Sequence[int],
                    rho: Optional[WeightDensity] = None, samples: int = 200, seed: int = 0,
                    guard: int = DEFAULT_GUARD) -> SeriesReport:
    """<|R2 - int f|^2> per N; every N uses the same alpha samples (paired columns)."""
    rho = rho or WeightDensity()
    mat = r2_samples(seq, window, grid, rho, samples, seed, guard)
    target = window.integral
    dev2 = (mat - target) ** 2
    rows = []
    for j, n in enumerate(grid):
        v = float(np.mean(dev2[:, j]))
        se = float(np.std(dev2[:, j], ddof=1) / math.sqrt(samples))
        rows.append((int(n), v, se))
    return SeriesReport(("N", "value", "stderr"), rows, mat, tuple(int(n) for n in grid),
                        {"seed": seed, "samples": samples, "target": target})


@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    ci_lo: float
    ci_hi: float
    n_rows: int
    dropped: tuple = ()
    method: str = "pairs"


def _ols(x: np.ndarray, y: np.ndarray) -> tuple:
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def decay_fit(series, n_boot: int = 2000, seed: int = 0, level: float = 0.95) -> DecayFit:
    """OLS slope of log value against log N with a bootstrap interval.

    ``series`` is a SeriesReport or a pair (Ns, values).  When a variance
    series carries its per-sample matrix, the bootstrap resamples samples
    (rows of the matrix) jointly across N; otherwise it resamples (N, value)
    pairs.  Non-positive values are dropped and listed.
    """
    matrix = None
    target = None
    if isinstance(series, SeriesReport):
        Ns = series.column("N")
        vals = series.column("value")
        if series.matrix is not None and "target" in series.meta:
            matrix, target = series.matrix, series.meta["target"]
    else:
        Ns, vals = (np.asarray(v, dtype=np.float64) for v in series)
    keep = vals > 0
    dropped = tuple(int(n) for n in Ns[~keep])
    if dropped:
        warnings.warn(f"decay_fit dropped non-positive rows at N = {list(dropped)}", stacklevel=2)
    if int(keep.sum()) < 3:
        raise ValueError("decay_fit needs at least three positive rows")
    x, y = np.log(Ns[keep]), np.log(vals[keep])
    slope, intercept = _ols(x, y)
    if abs(slope) < 1e-12:
        slope = 0.0
    rng = aux_stream(seed, 2)
    boots = []
    if matrix is not None:
        dev2 = (matrix[:, keep] - target) ** 2
        S = dev2.shape[0]
        for _ in range(n_boot):
            idx = rng.integers(0, S, S)
            m = dev2[idx].mean(axis=0)
            if np.all(m > 0):
                boots.append(_ols(x, np.log(m))[0])
        method = "paired-samples"
    else:
        R = x.size
        for _ in range(n_boot):
            idx = rng.integers(0, R, R)
            if np.unique(x[idx]).size >= 2:
                boots.append(_ols(x[idx], y[idx])[0])
        method = "pairs"
    a = (1.0 - level) / 2.0
    lo, hi = (np.quantile(boots, [a, 1.0 - a]) if boots else (math.nan, math.nan))
    return DecayFit(slope, intercept, float(lo), float(hi), int(keep.sum()), dropped, method)
