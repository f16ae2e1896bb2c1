"""Quick internal checks run by ``lacpair selftest``.

Each check returns (name, passed, detail).  The set covers hand-checkable
examples and oracle equivalence at small sizes; it finishes in seconds.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import kernels
from .diophantine import CountParams, count_condition_a, count_s_fast, count_s_oracle
from .paircorr import WindowFunction, circle_dist, pair_count, r2_smooth
from .precision import frac_dilate, required_bits
from .sequences import LacunarySequence
from .spectral import substream, weyl_sum

__all__ = ["run_checks"]


def _check_values():
    g2, g32 = LacunarySequence.geometric(2), LacunarySequence.geometric("3/2")
    ok = g2.exact(3) == 8 and g32.exact(2) == Fraction(9, 4)
    ok &= required_bits(g2, 100, 64) == 164 and required_bits(g32, 100, 64) == 123
    ok &= required_bits(LacunarySequence.exponential(), 10, 64) == 79
    return "sequence values and bit budgets", ok, "2^3, (3/2)^2, required_bits"


def _check_frac():
    g2 = LacunarySequence.geometric(2)
    got = [float(frac_dilate("1/3", g2, x)) for x in (5, 10000)] + [float(frac_dilate("1/2", g2, 3))]
    ok = abs(got[0] - 2 / 3) < 1e-15 and abs(got[1] - 1 / 3) < 1e-15 and got[2] == 0.0
    return "exact fractional parts", ok, f"{got}"


def _check_pairs_hand():
    ok = circle_dist(0.9, 0.1) == 0.2 or abs(circle_dist(0.9, 0.1) - 0.2) < 1e-15
    ok &= pair_count([0.0, 0.1], 1.0) == 2 and pair_count([0.0, 0.5], 1.0) == 0
    ok &= pair_count([0.0, 0.25, 0.5, 0.75], 1.0) == 0
    eq = np.arange(16) / 16.0
    v = r2_smooth(eq, WindowFunction.triangle(3.0)).value
    ok &= abs(v - 2.0) < 1e-12
    return "hand pair examples", bool(ok), f"equispaced triangle(3) = {v:.15f}"


def _check_pairs_oracle():
    rng = substream(12345, 0)
    bad = 0
    for _ in range(60):
        n = int(rng.integers(2, 300))
        th = rng.random(n)
        if rng.random() < 0.3:
            th = np.round(th * 64) / 64 % 1.0  # ties and repeats
        s = float(rng.uniform(0.1, 4.0))
        if pair_count(th, s, "sorted") != pair_count(th, s, "direct"):
            bad += 1
    return "sorted vs direct pair counts", bad == 0, f"{bad} mismatches in 60"


def _check_weyl():
    g2 = LacunarySequence.geometric(2)
    v = weyl_sum("1/2", g2, 1, 5).value
    return "Weyl sum integer phases", abs(v - 20) < 1e-9, f"S = {v}"


def _check_counts():
    g2 = LacunarySequence.geometric(2)
    a = [count_condition_a(g2, CountParams.explicit(4, 8, k)).count for k in (2, 3)]
    ok = a == [0, 2]
    mism = []
    for seq in (g2, LacunarySequence.geometric("3/2")):
        for N in (3, 6, 8):
            p = CountParams.from_epsilon(N, "1/5")
            f, o = count_s_fast(seq, p).count, count_s_oracle(seq, p).count
            if f != o:
                mism.append((seq.name, N, f, o))
    return "Diophantine counts fast vs oracle", ok and not mism, f"A={a} mismatches={mism}"


def _check_backends():
    if kernels.BACKEND != "cython":
        return "compiled vs Python kernels", True, "compiled core absent; fallback only"
    rng = substream(7, 0)
    th = rng.random(400)
    h = 0.7 / 800
    from . import _kernels_py as py

    ok = int(py.count_pairs_sorted(th, h)) == int(kernels.count_pairs_sorted(th, h))
    return "compiled vs Python kernels", ok, "count_pairs_sorted"


CHECKS = (_check_values, _check_frac, _check_pairs_hand, _check_pairs_oracle, _check_weyl,
          _check_counts, _check_backends)


def run_checks() -> list:
    out = []
    for fn in CHECKS:
        try:
            out.append(fn())
        except Exception as exc:  # a crash is a failed check, not a crashed CLI
            out.append((fn.__name__.lstrip("_"), False, f"{type(exc).__name__}: {exc}"))
    return out
