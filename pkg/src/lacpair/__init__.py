"""Pair correlation of dilated lacunary sequences modulo one.

The statistics sit on exact sequence arithmetic; the Diophantine counters
bound how far they can stray from the random model.
"""
from .diophantine import (
    BoundReport,
    CountParams,
    CountReport,
    Threshold,
    bound_report,
    condition_a_solutions,
    count_condition_a,
    count_s_fast,
    count_s_oracle,
    solution_structure,
)
from .experiments import (
    DecayFit,
    ExperimentPlan,
    SeriesReport,
    convergence_scan,
    decay_fit,
    subsequence_grid,
    variance_series,
)
from .kernels import BACKEND
from .paircorr import (
    PairCorrEstimate,
    PoissonModel,
    WindowFunction,
    circle_dist,
    dilated_points,
    monotonicity_check,
    pair_count,
    r2_smooth,
    r2_window,
)
from .precision import PrecisionBudgetError, frac_dilate, required_bits, theta_table
from .sequences import LacunarySequence, SequenceError, gap, parse_sequence, verify_lacunary
from .spectral import (
    WeightDensity,
    expectation_mc,
    r2_fourier,
    variance_fourier_tiny,
    variance_mc,
    weyl_sum,
)

__version__ = "0.1.0"
