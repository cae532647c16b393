"""Command-line front end.

Usage::

    quotient-spectrum <command> [--config FILE] [--out DIR] [--threads N] [--n N] [--depth K]

Commands: pressure, dimension, sinf, spectrum, flow-spectrum, boundaries,
discontinuity-probe.  Exit status is 0 on success, 2 for configuration
errors and 3 for numerical failures.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import ConfigError, ExperimentConfig, default_config_text, load_config
from .cylinders import BudgetExceeded
from .flow import SuspensionProblem, flow_spectrum, write_flow_csv
from .models import ModelError
from .pressure import ConvergenceError, InconclusiveError, bowen_dimension, pressure, s_infinity
from .spectrum import (
    OutOfRangeError,
    QuotientProblem,
    boundary_summary,
    classify_regimes,
    default_grid,
    discontinuity_probe,
    fmt,
    write_spectrum_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

COMMANDS = ("pressure", "dimension", "sinf", "spectrum", "flow-spectrum", "boundaries", "discontinuity-probe")


class _Context:
    def __init__(self, cfg: ExperimentConfig, out: Path, threads: int):
        self.cfg = cfg
        self.out = out
        self.threads = threads
        self.model = cfg.build_model()

    def path(self, name: str) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        return self.out / name

    def quotient_problem(self) -> QuotientProblem:
        cfg = self.cfg
        num = cfg.potential(self.model, cfg.numerator)
        den = cfg.potential(self.model, cfg.denominator)
        try:
            return QuotientProblem(self.model, num, den, cfg.spec, cfg.tolerances)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def suspension_problem(self) -> SuspensionProblem:
        cfg = self.cfg
        roof = cfg.potential(self.model, cfg.roof)
        g = cfg.potential(self.model, cfg.flow_observable)
        try:
            if cfg.flow_observable_kind == "fiber-constant":
                return SuspensionProblem.from_fiber_constant(self.model, g, roof, cfg.spec, cfg.tolerances)
            return SuspensionProblem(self.model, roof, g, cfg.spec, cfg.tolerances)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def _write_rows(path: Path, header: Sequence[str], rows: Sequence[Sequence[str]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _table(rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(str(r[i])) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(str(c).rjust(w) for c, w in zip(r, widths)) for r in rows)


def tail_cutoffs(n: int) -> list[int]:
    """Default n-tail: ``n/8, n/4, n/2, n`` without repeats."""
    return sorted({max(1, n // 8), max(1, n // 4), max(1, n // 2), n})


def aitken_estimate(values: Sequence[float]) -> float | None:
    """Aitken extrapolation of the last three values, ``None`` when undefined."""
    if len(values) < 3:
        return None
    a, b, c = values[-3:]
    denom = (c - b) - (b - a)
    if denom == 0.0 or not math.isfinite(denom):
        return None
    return c - (c - b) ** 2 / denom


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_pressure(ctx: _Context) -> int:
    cfg = ctx.cfg
    combo = cfg.build_combination(ctx.model)
    val = pressure(ctx.model, combo, cfg.spec, cfg.tolerances)
    rows = [[str(cfg.n), str(cfg.k), fmt(val.value), fmt(val.error_bound)]]
    _write_rows(ctx.path("pressure.csv"), ["n", "k", "pressure", "error_bound"], rows)
    print(_table([["n", "k", "pressure", "error_bound"]] + rows))
    return EXIT_OK


def cmd_dimension(ctx: _Context) -> int:
    cfg = ctx.cfg
    ns = sorted(set(cfg.tail)) if cfg.tail else tail_cutoffs(cfg.n)
    dims = [bowen_dimension(ctx.model, cfg.spec.with_n(m), cfg.tolerances.bowen_tol, cfg.tolerances) for m in ns]
    rows = [[str(m), str(cfg.k), fmt(d)] for m, d in zip(ns, dims)]
    _write_rows(ctx.path("dimension.csv"), ["n", "k", "dimension"], rows)
    print(_table([["n", "k", "dimension"]] + rows))
    monotone = all(b >= a - 1e-12 for a, b in zip(dims, dims[1:]))
    print(f"Bowen root at n={ns[-1]}: {fmt(dims[-1])}")
    print(f"n-tail monotone: {'yes' if monotone else 'no'}")
    est = aitken_estimate(dims)
    print(f"Richardson (Aitken) estimate of the n -> infinity limit: {'n/a' if est is None else fmt(est)} (estimate only)")
    return EXIT_OK


def cmd_sinf(ctx: _Context) -> int:
    tol = ctx.cfg.tolerances
    s = s_infinity(ctx.model, tol.sinf_tol, tol.probe_cutoff)
    _write_rows(ctx.path("sinf.csv"), ["model", "s_inf"], [[ctx.model.name, fmt(s)]])
    print(f"s_inf({ctx.model.name}) = {fmt(s)}")
    return EXIT_OK


def _grid(ctx: _Context, problem: QuotientProblem) -> np.ndarray:
    cfg = ctx.cfg
    if cfg.alphas:
        return np.asarray(cfg.alphas, dtype=float)
    lo, hi = cfg.alpha_min, cfg.alpha_max
    if lo is None or hi is None:
        summary = boundary_summary(problem, cfg.boundary_probe)
        lo = summary.alpha_min if lo is None else lo
        hi = summary.alpha_max if hi is None else hi
    try:
        return default_grid(lo, hi, cfg.points)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _print_regimes(report) -> None:
    for reg, iv in report.intervals.items():
        print(f"{reg}: {'empty' if iv is None else '[' + fmt(iv[0]) + ', ' + fmt(iv[1]) + ']'}")
    if not report.j2_contiguous:
        print("J2 tags are not contiguous (truncation artifact); offending alphas: " + ", ".join(fmt(a) for a in report.offending))
    if report.out_of_range:
        print("out of range: " + ", ".join(fmt(a) for a in report.out_of_range))


def cmd_spectrum(ctx: _Context) -> int:
    problem = ctx.quotient_problem()
    grid = _grid(ctx, problem)
    report = classify_regimes(problem, grid, ctx.cfg.spectrum_tol, ctx.threads, refine_steps=0)
    write_spectrum_csv(ctx.path("spectrum.csv"), report.points)
    rows = [["alpha", "b", "q_c", "regime"]] + [p.csv_row()[:4] for p in report.points]
    print(_table(rows))
    print(f"truncated repeller dimension: {fmt(problem.dimension())}")
    _print_regimes(report)
    return EXIT_OK


def cmd_flow_spectrum(ctx: _Context) -> int:
    problem = ctx.suspension_problem()
    grid = _grid(ctx, problem.base)
    pts = flow_spectrum(problem, grid, ctx.cfg.spectrum_tol, ctx.threads)
    solved = [p for p in pts if p is not None]
    write_flow_csv(ctx.path("flow_spectrum.csv"), solved)
    rows = [["alpha", "B", "q_c", "regime", "base_b"]] + [
        [r[0], r[1], r[2], r[3], r[-1]] for r in (p.csv_row() for p in solved)
    ]
    print(_table(rows))
    missing = [a for a, p in zip(grid, pts) if p is None]
    if missing:
        print("out of range: " + ", ".join(fmt(a) for a in missing))
    return EXIT_OK


def _interval(iv) -> str:
    return "[" + fmt(iv[0]) + ", " + fmt(iv[1]) + "]"


def cmd_boundaries(ctx: _Context) -> int:
    problem = ctx.quotient_problem()
    s = boundary_summary(problem, ctx.cfg.boundary_probe)
    rows = [
        ["alpha_m", fmt(s.alpha_min)],
        ["alpha_M", fmt(s.alpha_max)],
        ["alpha_lower", fmt(s.alpha_lower) if s.alpha_lower is not None else ""],
        ["alpha_upper", fmt(s.alpha_upper) if s.alpha_upper is not None else ""],
        ["E", "empty" if s.E is None else _interval(s.E)],
        ["U", " ".join(_interval(iv) for iv in s.U) or "empty"],
        ["min_orbit", " ".join(map(str, s.min_orbit))],
        ["max_orbit", " ".join(map(str, s.max_orbit))],
        ["diverges", "yes" if s.diverges else "no"],
    ]
    _write_rows(ctx.path("boundaries.csv"), ["quantity", "value"], rows)
    print(_table(rows))
    return EXIT_OK


def cmd_discontinuity_probe(ctx: _Context) -> int:
    problem = ctx.quotient_problem()
    cfg = ctx.cfg
    alphas = cfg.alphas or cfg.probe_alphas
    rep = discontinuity_probe(problem, cfg.side, alphas, cfg.spectrum_tol, ctx.threads)
    write_spectrum_csv(ctx.path("discontinuity.csv"), rep.points)
    if rep.points:
        print(_table([["alpha", "b", "q_c", "regime"]] + [p.csv_row()[:4] for p in rep.points]))
    print(f"truncated repeller dimension: {fmt(rep.dimension)}")
    if rep.empty:
        print("empty probe: no level on this side is reached by the truncated system")
    else:
        print(f"sup b: {fmt(rep.sup_b)}")
        print(f"gap to the repeller dimension: {fmt(rep.gap)}")
        print(f"monotone toward 0: {'yes' if rep.monotone else 'no'}")
    if rep.out_of_range:
        print("out of range: " + ", ".join(fmt(a) for a in rep.out_of_range))
    return EXIT_OK


HANDLERS = {
    "pressure": cmd_pressure,
    "dimension": cmd_dimension,
    "sinf": cmd_sinf,
    "spectrum": cmd_spectrum,
    "flow-spectrum": cmd_flow_spectrum,
    "boundaries": cmd_boundaries,
    "discontinuity-probe": cmd_discontinuity_probe,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment configuration file")
    common.add_argument("--out", default=".", help="directory for CSV artifacts (default: current directory)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for alpha grids")
    common.add_argument("--n", type=int, help="alphabet cutoff (overrides the config)")
    common.add_argument("--depth", type=int, help="cylinder depth k (overrides the config)")
    parser = argparse.ArgumentParser(prog="quotient-spectrum", description=__doc__.split("\n\n")[0])
    parser.add_argument("--print-default-config", action="store_true", help="print a config file with every default and exit")
    sub = parser.add_subparsers(dest="command")
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    if args.print_default_config:
        print(default_config_text(), end="")
        return EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg = load_config(args.config).with_overrides(n=args.n, k=args.depth)
        ctx = _Context(cfg, Path(args.out), args.threads)
        return HANDLERS[args.command](ctx)
    except (ConfigError, ModelError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, InconclusiveError, BudgetExceeded, OutOfRangeError, FloatingPointError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
