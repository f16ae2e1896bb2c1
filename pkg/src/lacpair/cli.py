"""Command-line front end: ``lacpair <command> [flags]``.

Every command writes CSV (default) or JSON to stdout or ``--out-file``.
Exit status: 0 ok, 1 mismatch between modes or failed selftest,
2 invalid input, 3 precision or work budget exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .diophantine import (
    CountParams,
    bound_report,
    count_condition_a,
    count_s_fast,
    count_s_oracle,
)
from .experiments import ExperimentPlan, convergence_scan
from .paircorr import PoissonModel, WindowFunction, r2_smooth, r2_window
from .precision import DEFAULT_GUARD, PrecisionBudgetError, as_alpha, theta_table
from .sequences import SequenceError, parse_rational, parse_sequence
from .spectral import WeightDensity, expectation_mc, substream, variance_mc

__all__ = ["main", "build_parser", "RunConfig", "run", "HEADERS"]

HEADERS = {
    "paircorr": ("N", "alpha", "window", "algorithm", "value"),
    "expect": ("N", "window", "samples", "seed", "mean", "stderr", "variance", "ci_lo", "ci_hi"),
    "variance": ("N", "window", "samples", "seed", "mean", "stderr", "variance", "ci_lo", "ci_hi"),
    "count-a": ("N", "epsilon", "M", "K", "mode", "count", "bound_ratio", "elapsed_ms"),
    "count-b": ("N", "epsilon", "M", "K", "mode", "count", "bound_ratio", "elapsed_ms"),
    "convergence": ("N", "alpha", "value", "abs_dev"),
    "selftest": ("check", "passed", "detail"),
}


class UsageError(ValueError):
    pass


class Mismatch(RuntimeError):
    pass


# -- argument types --------------------------------------------------------------

def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return v


def _grid(text: str) -> List[int]:
    try:
        out = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad N grid {text!r}")
    if not out or min(out) < 2:
        raise argparse.ArgumentTypeError("grid entries must be integers >= 2")
    return out


def _window(text: str) -> WindowFunction:
    try:
        return WindowFunction.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _rational(text: str) -> str:
    # validated here, kept as typed so reports echo the user's literal
    try:
        parse_rational(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc))
    return text.strip()


def _pair(text: str) -> tuple:
    parts = text.split(",")
    try:
        lo, hi = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo,hi, got {text!r}")
    if not hi > lo:
        raise argparse.ArgumentTypeError("need lo < hi")
    return lo, hi


def _sequence(text: str):
    if text.strip() == "poisson":
        return PoissonModel()
    try:
        return parse_sequence(text)
    except (ValueError, OSError) as exc:
        raise argparse.ArgumentTypeError(str(exc))


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lacpair", description="Pair correlation of dilated lacunary sequences.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", choices=("csv", "json"), default="csv")
        sp.add_argument("--out-file", default=None, help="write here instead of stdout")
        sp.add_argument("--precision-guard", type=_positive_int, default=DEFAULT_GUARD,
                        help="guard bits on top of the magnitude of alpha a(N)")

    def sampling(sp, samples):
        sp.add_argument("--samples", type=_positive_int, default=samples)
        sp.add_argument("--seed", type=_seed, default=0)

    def seq_arg(sp, default="geometric:3/2"):
        sp.add_argument("--seq", type=_sequence, default=_sequence(default),
                        help="geometric:<ratio> | exp | custom:<path>[@ratio] | poisson")

    pc = sub.add_parser("paircorr", help="R2 for one alpha")
    common(pc)
    seq_arg(pc)
    pc.add_argument("--N", type=_positive_int, required=True)
    pc.add_argument("--alpha", default=None, help="decimal or rational, kept exact")
    pc.add_argument("--window", type=_window, default=_window("indicator:1.0"))
    pc.add_argument("--algorithm", choices=("direct", "sorted", "smooth"), default="sorted")
    pc.add_argument("--seed", type=_seed, default=0, help="used by --seq poisson only")

    for name, desc in (("expect", "Monte Carlo mean of R2 over alpha ~ rho"),
                       ("variance", "Monte Carlo second moment of R2 - int f")):
        sp = sub.add_parser(name, help=desc)
        common(sp)
        seq_arg(sp)
        sampling(sp, 200)
        sp.add_argument("--N", type=_positive_int, default=None)
        sp.add_argument("--grid", type=_grid, default=None)
        sp.add_argument("--window", type=_window, default=_window("triangle:1.0"))
        sp.add_argument("--rho", default="1,2", help="support lo,hi of the bump weight")

    for name, desc in (("count-a", "solutions of n |a(x) - a(y)| < K"),
                       ("count-b", "six-tuple count S(N)")):
        sp = sub.add_parser(name, help=desc)
        common(sp)
        seq_arg(sp, "geometric:2")
        sp.add_argument("--N", type=_positive_int, default=None)
        sp.add_argument("--grid", type=_grid, default=None)
        sp.add_argument("--epsilon", type=_rational, required=True)
        sp.add_argument("--mode", choices=("oracle", "fast", "both"), default="fast")
        sp.add_argument("--delta-ref", type=float, default=None,
                        help="with a grid of >= 3 N, report the slope test on stderr")
        if name == "count-b":
            sp.add_argument("--strategy", choices=("sorted", "regimes"), default="sorted")

    cv = sub.add_parser("convergence", help="R2 along an N grid for sampled alpha")
    common(cv)
    seq_arg(cv)
    sampling(cv, 1)
    cv.add_argument("--delta", type=_rational, default=None)
    cv.add_argument("--m-max", type=_positive_int, default=None)
    cv.add_argument("--grid", type=_grid, default=None)
    cv.add_argument("--alpha", default=None, help="pin alpha instead of sampling")
    cv.add_argument("--alpha-range", type=_pair, default=(1.0, 2.0))
    cv.add_argument("--window", type=_window, default=_window("indicator:1.0"))

    st = sub.add_parser("selftest", help="oracle equivalence and trivial examples")
    common(st)
    return p


@dataclass
class RunConfig:
    command: str
    args: argparse.Namespace
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)


# -- commands ------------------------------------------------------------------------

def _ns(args) -> List[int]:
    if args.grid and args.N:
        raise UsageError("give --N or --grid, not both")
    if args.grid:
        return args.grid
    if args.N:
        if args.N < 2:
            raise UsageError("need N >= 2")
        return [args.N]
    raise UsageError("one of --N or --grid is required")


def _cmd_paircorr(cfg: RunConfig):
    a = cfg.args
    if a.N < 2:
        raise UsageError("need N >= 2")
    if isinstance(a.seq, PoissonModel):
        th = a.seq.points(a.N, substream(a.seed, 0))
        alpha_label = "nan"
        cfg.meta["seed"] = a.seed
    else:
        if a.alpha is None:
            raise UsageError("--alpha is required for a deterministic sequence")
        alpha = as_alpha(a.alpha)
        if alpha <= 0:
            raise UsageError("alpha must be positive")
        th = theta_table(alpha, a.seq, a.N, a.precision_guard)
        alpha_label = a.alpha
    w = a.window
    if a.algorithm == "smooth":
        value = r2_smooth(th, w).value
    else:
        if w.kind != "indicator":
            raise UsageError(f"--algorithm {a.algorithm} counts pairs; it needs an indicator window")
        value = r2_window(th, w.param, a.algorithm).value
    cfg.rows.append((a.N, alpha_label, w.label(), a.algorithm, float(value)))


def _cmd_moment(cfg: RunConfig):
    a = cfg.args
    rho = WeightDensity.parse(a.rho)
    cfg.meta["seed"] = a.seed
    for N in _ns(a):
        if cfg.command == "expect":
            est = expectation_mc(a.seq, a.window, N, rho, a.samples, a.seed, a.precision_guard)
            row = (N, a.window.label(), a.samples, a.seed, est.mean, est.stderr, est.variance,
                   est.ci[0], est.ci[1])
        else:
            est = variance_mc(a.seq, a.window, N, rho, a.samples, a.seed, a.precision_guard)
            row = (N, a.window.label(), a.samples, a.seed, est.mean, est.var_stderr, est.variance,
                   est.ci[0], est.ci[1])
        cfg.rows.append(row)


def _count_row(rep, eps, mode):
    p = rep.params
    return (p.N, str(eps), p.M, float(p.K), mode, int(rep.count), float(rep.bound_ratio),
            round(float(rep.elapsed_ms), 3))


def _cmd_count(cfg: RunConfig):
    a = cfg.args
    if isinstance(a.seq, PoissonModel):
        raise UsageError("counting needs a deterministic sequence")
    modes = ("oracle", "fast") if a.mode == "both" else (a.mode,)
    fast_reports = []
    mismatch = []
    for N in _ns(a):
        params = CountParams.from_epsilon(N, a.epsilon, a.delta_ref)
        counts = {}
        for mode in modes:
            if cfg.command == "count-a":
                rep = count_condition_a(a.seq, params, mode)
            elif mode == "oracle":
                rep = count_s_oracle(a.seq, params)
            else:
                rep = count_s_fast(a.seq, params, a.strategy)
            counts[mode] = rep.count
            cfg.rows.append(_count_row(rep, a.epsilon, mode))
            if mode == "fast" or a.mode == "oracle":
                fast_reports.append(rep)
        if len(set(counts.values())) > 1:
            mismatch.append((N, counts))
    if a.delta_ref is not None and len(fast_reports) >= 3:
        cond = "A" if cfg.command == "count-a" else "B"
        br = bound_report(fast_reports, a.delta_ref, cond)
        print(f"bound {cond}: status={br.status} slope={br.slope:.4f} threshold={br.threshold:.4f} "
              f"passed={br.passed}", file=sys.stderr)
    if mismatch:
        raise Mismatch(f"oracle and fast counts differ: {mismatch}")


def _cmd_convergence(cfg: RunConfig):
    a = cfg.args
    if a.grid is None and (a.delta is None or a.m_max is None):
        raise UsageError("give --grid or both --delta and --m-max")
    if a.grid is not None and (a.delta is not None or a.m_max is not None):
        raise UsageError("--grid excludes --delta/--m-max")
    alpha = None
    if a.alpha is not None:
        alpha = as_alpha(a.alpha)
    plan = ExperimentPlan(a.seq, a.window, tuple(a.grid or ()), a.delta, a.m_max, alpha,
                          a.alpha_range, None, a.samples, a.seed, a.precision_guard)
    rep = convergence_scan(plan)
    cfg.meta["seed"] = a.seed
    cfg.rows.extend(rep.rows)


def _cmd_selftest(cfg: RunConfig):
    from .selftest import run_checks

    for name, ok, detail in run_checks():
        cfg.rows.append((name, bool(ok), detail))
    if not all(r[1] for r in cfg.rows):
        cfg.meta["failed"] = True


COMMANDS = {
    "paircorr": _cmd_paircorr,
    "expect": _cmd_moment,
    "variance": _cmd_moment,
    "count-a": _cmd_count,
    "count-b": _cmd_count,
    "convergence": _cmd_convergence,
    "selftest": _cmd_selftest,
}


# -- output --------------------------------------------------------------------------

def _cell(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def render(cfg: RunConfig, fmt: str) -> str:
    cols = HEADERS[cfg.command]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in cfg.rows:
            w.writerow([_cell(v) for v in r])
        return buf.getvalue()

    def js(v):
        if isinstance(v, (float, np.floating)):
            v = float(v)
            return v if math.isfinite(v) else None
        return v

    doc = {"command": cfg.command, **{k: v for k, v in cfg.meta.items() if k != "failed"},
           "columns": list(cols), "rows": [{c: js(v) for c, v in zip(cols, r)} for r in cfg.rows]}
    return json.dumps(doc, indent=2) + "\n"


def run(cfg: RunConfig) -> int:
    """Execute one command and emit its report; returns the exit status."""
    status = 0
    try:
        COMMANDS[cfg.command](cfg)
    except Mismatch as exc:
        print(f"lacpair: {exc}", file=sys.stderr)
        status = 1
    except PrecisionBudgetError as exc:
        print(f"lacpair: budget exceeded: {exc}", file=sys.stderr)
        return 3
    except (UsageError, SequenceError, ValueError, TypeError, ZeroDivisionError) as exc:
        print(f"lacpair: {exc}", file=sys.stderr)
        return 2
    if cfg.meta.get("failed"):
        status = 1
    text = render(cfg, cfg.args.out)
    if cfg.args.out_file:
        with open(cfg.args.out_file, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    t0 = time.perf_counter()
    status = run(RunConfig(args.command, args))
    print(f"lacpair {args.command}: exit {status} in {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
