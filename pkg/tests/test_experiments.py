import warnings

import numpy as np
import pytest

from lacpair.experiments import (
    ExperimentPlan,
    SeriesReport,
    convergence_scan,
    decay_fit,
    subsequence_grid,
    variance_series,
)
from lacpair.paircorr import PoissonModel, WindowFunction
from lacpair.sequences import LacunarySequence

IND1 = WindowFunction.indicator(1.0)


@pytest.mark.parametrize("delta,m,want", [(2, 4, [1, 2, 3, 4]), (1, 4, [1, 4, 9, 16]),
                                          ("0.5", 3, [1, 16, 81])])
def test_subsequence_grid(delta, m, want):
    assert subsequence_grid(delta, m) == want


def test_subsequence_grid_exact_roots():
    # 2/delta = 3/2 : floor(m^(3/2)) with exact integer roots
    assert subsequence_grid("4/3", 9) == [1, 2, 5, 8, 11, 14, 18, 22, 27]


def test_subsequence_ratios_shrink():
    g = subsequence_grid("0.5", 60)
    r = [b / a for a, b in zip(g[1:], g[2:])]
    assert r[-1] < 2 and all(b <= a for a, b in zip(r, r[1:]))


def test_grid_validation():
    with pytest.raises(ValueError):
        subsequence_grid(0, 3)
    with pytest.raises(ValueError):
        ExperimentPlan(PoissonModel(), IND1, grid=(8, 4))
    with pytest.raises(ValueError):
        ExperimentPlan(PoissonModel(), IND1)


def test_plan_from_delta_skips_n1():
    plan = ExperimentPlan(PoissonModel(), IND1, delta=1, m_max=4)
    assert plan.grid == (4, 9, 16)


def test_convergence_deterministic(g32):
    plan = ExperimentPlan(g32, IND1, grid=(64, 256), samples=3, seed=9)
    a, b = convergence_scan(plan), convergence_scan(plan)
    assert a.to_csv() == b.to_csv()
    assert a.to_csv().splitlines()[0] == "N,alpha,value,abs_dev"
    assert len(a.rows) == 6


def test_negative_control_rational_alpha(g2):
    # alpha = 1/3 puts every point at 1/3 or 2/3
    rep = convergence_scan(ExperimentPlan(g2, IND1, grid=(64, 128), alpha="1/3"))
    assert rep.column("abs_dev").min() > 10


def test_poisson_surrogate_converges():
    rep = convergence_scan(ExperimentPlan(PoissonModel(), IND1, grid=(100, 10000), samples=20, seed=1))
    dev = rep.matrix - 1.0
    assert np.median(np.abs(dev[:, 1])) < np.median(np.abs(dev[:, 0]))


def test_decay_fit_exact_power():
    Ns = np.array([10, 20, 40, 80, 160], dtype=float)
    f = decay_fit((Ns, Ns**-0.5))
    assert f.slope == pytest.approx(-0.5) and f.ci_lo == pytest.approx(-0.5)


def test_decay_fit_constant():
    f = decay_fit(([10, 20, 40], [3.0, 3.0, 3.0]))
    assert f.slope == 0.0


def test_decay_fit_drops_nonpositive():
    with pytest.warns(UserWarning, match="dropped"):
        f = decay_fit(([10, 20, 40, 80], [1.0, 0.0, 0.25, 0.125]))
    assert f.dropped == (20,) and f.n_rows == 3


def test_decay_fit_needs_three_rows():
    with pytest.raises(ValueError):
        decay_fit(([10, 20], [1.0, 0.5]))


def test_variance_series_paired_fit(g32):
    vs = variance_series(g32, WindowFunction.triangle(1.0), [64, 128, 256, 512], samples=100, seed=3)
    assert isinstance(vs, SeriesReport) and len(vs.rows) == 4
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        f = decay_fit(vs, n_boot=300)
    assert f.method == "paired-samples" and f.ci_lo <= f.slope <= f.ci_hi
