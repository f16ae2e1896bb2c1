import math
import warnings

import numpy as np
import pytest

from lacpair.paircorr import PoissonModel, WindowFunction, r2_smooth
from lacpair.precision import PrecisionBudgetError, theta_table
from lacpair.sequences import LacunarySequence
from lacpair.spectral import (
    WeightDensity,
    expectation_mc,
    r2_fourier,
    r2_fourier_fixed,
    r2_samples,
    sample_alpha,
    substream,
    variance_fourier_tiny,
    variance_mc,
    weyl_sum,
    weyl_sums,
)

TRI1 = WindowFunction.triangle(1.0)


def _equispaced_seq(n):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return LacunarySequence.custom([str(x) for x in range(1, n + 1)])


def test_weyl_zero_mode(g32):
    assert weyl_sum("1.7", g32, 0, 12).value == 12 * 12 - 12


def test_weyl_integer_phases(g2):
    assert weyl_sum("1/2", g2, 1, 5).value == pytest.approx(20, abs=1e-12)


def test_weyl_real_and_symmetric(g32):
    _, fix = theta_table("1.2345", g32, 40, fixed=True)
    s = weyl_sums(fix, [7, -7, 123, -123])
    assert np.allclose(s.imag, 0.0)
    assert s[0].real == pytest.approx(s[1].real, abs=1e-9)
    assert s[2].real == pytest.approx(s[3].real, abs=1e-9)


def test_weyl_matches_direct_sum(g32):
    N, n = 30, 11
    th = theta_table("1.2345", g32, N)
    t = np.exp(2j * np.pi * n * th.astype(np.longdouble)).sum()
    want = abs(complex(t)) ** 2 - N
    assert weyl_sum("1.2345", g32, n, N).value.real == pytest.approx(want, abs=1e-8)


def test_weyl_equals_pair_double_sum(g32):
    N = 32
    th = theta_table("1.61", g32, N).astype(np.longdouble)
    for n in (1, 5, 40):
        d = n * (th[:, None] - th[None, :])
        off = ~np.eye(N, dtype=bool)
        pair = complex(np.exp(2j * np.pi * d[off]).sum())
        got = weyl_sum("1.61", g32, n, N).value
        assert got.real == pytest.approx(pair.real, abs=1e-8) and abs(pair.imag) < 1e-8


def test_weyl_mode_budget(g32):
    with pytest.raises(PrecisionBudgetError):
        weyl_sum("1.2345", g32, 2**80, 10)


def test_zero_mode_alone(g32):
    _, fix = theta_table("1.3", g32, 50, fixed=True)
    assert r2_fourier_fixed(fix, WindowFunction.triangle(2.0), 0) == pytest.approx(2.0 * (1 - 1 / 50))


def test_fourier_identity_gaussian(g32):
    # a Gaussian transform is negligible past the cutoff, so both routes agree
    th = theta_table("1.2345", g32, 64)
    g = WindowFunction.gaussian(0.5)
    assert r2_fourier("1.2345", g32, g, 64).value == pytest.approx(r2_smooth(th, g).value, abs=1e-12)


def test_fourier_triangle_within_tail_bound(g32):
    N = 64
    th = theta_table("1.2345", g32, N)
    d = abs(r2_fourier("1.2345", g32, TRI1, N).value - r2_smooth(th, TRI1).value)
    # |S_n| <= N^2 - N; the tail beyond 20N is bounded by N * B
    assert d <= TRI1.fourier_tail(20.0) * N * (N - 1) / N


def test_fourier_equispaced():
    N = 16
    s = _equispaced_seq(N)
    w = WindowFunction.triangle(3.0)
    errs = [abs(r2_fourier(f"1/{N}", s, w, N, cutoff=c * N).value - 2.0) for c in (20, 80)]
    assert errs[0] < 5e-3 and errs[1] < errs[0] / 3


def test_fourier_rejects_indicator(g32):
    with pytest.raises(ValueError):
        r2_fourier("1.2", g32, WindowFunction.indicator(1.0), 16)
    with pytest.raises(ValueError):
        r2_fourier("1.2", g32, TRI1, 16, cutoff=16)


def test_bump_density():
    rho = WeightDensity()
    assert rho.normalization() == pytest.approx(1.0, abs=1e-10)
    assert complex(rho.fourier(0.0)) == pytest.approx(1.0, abs=1e-10)
    for xi in (0.0, 0.7, 5.5, 13.3, 60.1):
        assert complex(rho.fourier(xi)) == pytest.approx(rho.fourier_quad(xi), abs=1e-13)
    assert abs(complex(rho.fourier(1e4))) == 0.0


def test_bump_samples():
    rho = WeightDensity()
    rng = substream(5, 0)
    xs = np.array([sample_alpha(rho, rng) for _ in range(20000)])
    assert xs.min() > 1.0 and xs.max() < 2.0
    assert abs(xs.mean() - 1.5) < 3 * xs.std() / math.sqrt(xs.size)
    again = substream(5, 0)
    assert [sample_alpha(rho, again) for _ in range(5)] == list(xs[:5])


def test_parse_density():
    assert WeightDensity.parse("2,3").center == 2.5
    with pytest.raises(ValueError):
        WeightDensity(2.0, 1.0)


def test_samples_deterministic_and_paired(g32):
    a = r2_samples(g32, TRI1, [64, 128], WeightDensity(), 8, 3)
    b = r2_samples(g32, TRI1, [128], WeightDensity(), 8, 3)
    assert np.array_equal(a[:, 1], b[:, 0])


def test_expectation_frozen(g32):
    e = expectation_mc(g32, TRI1, 256, samples=50, seed=1)
    assert e.mean == pytest.approx(1.0030530372315294, abs=1e-12)
    assert e.ci[0] < e.mean < e.ci[1]


def test_expectation_odd_window(g32):
    odd = WindowFunction.custom(lambda x: np.sin(x) * np.exp(-x * x), 8.0, 0.0)
    e = expectation_mc(g32, odd, 64, samples=30, seed=0)
    assert np.all(e.values == 0.0)


def test_expectation_poisson():
    e = expectation_mc(PoissonModel(), WindowFunction.indicator(1.0), 400, samples=100, seed=2)
    assert abs(e.mean - 399 / 400) < 3.5 * e.stderr


def test_minimum_samples(g32):
    with pytest.raises(ValueError):
        expectation_mc(g32, TRI1, 64, samples=10)
    with pytest.raises(ValueError):
        variance_mc(g32, TRI1, 64, samples=50)


def test_variance_constant_statistic(g32):
    v = variance_mc(g32, TRI1, 64, samples=100, values=np.ones(100))
    assert v.variance == 0.0 and v.ci == (0.0, 0.0)


def test_variance_ci_brackets(g32):
    v = variance_mc(g32, TRI1, 128, samples=120, seed=4)
    assert v.ci[0] <= v.variance <= v.ci[1]


def test_tiny_frozen(g32):
    t = variance_fourier_tiny(g32, TRI1, 8, 32)
    assert t.value == pytest.approx(0.20205612333115566, rel=1e-9)
    assert t.zero_mode == 0.875 and t.tail_bound > 0


def test_tiny_vanishing_transform(g32):
    # triangle of width N: f^(n/N) = 0 for every n != 0, so only the origin remains
    assert abs(variance_fourier_tiny(g32, WindowFunction.triangle(8.0), 8, 16).value) < 1e-25
    assert variance_fourier_tiny(g32, TRI1, 8, 0).value == 0.0


def test_tiny_limits(g32):
    with pytest.raises(ValueError):
        variance_fourier_tiny(g32, TRI1, 32, 8)
