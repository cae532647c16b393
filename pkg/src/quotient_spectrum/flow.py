"""Birkhoff spectra of suspension semi-flows over a Markov base.

A suspension flow runs up the fibre ``{x} x [0, tau(x))`` at unit speed and
then jumps to ``(T x, 0)``.  A flow observable ``g`` only enters through its
fibre integral ``Delta_g(x) = int_0^tau(x) g(x, t) dt``: the flow average of
``g`` along an orbit is the base quotient ``S_n Delta_g / S_n tau``.  The
level sets of the flow have dimension one more than the corresponding base
level sets, so this module is a thin wrapper around :mod:`.spectrum`.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Sequence

from .cylinders import TruncationSpec
from .models import MarkovSystem, Potential, product_potential
from .pressure import DEFAULT_TOLERANCES, EquilibriumStats, Tolerances
from .spectrum import (
    QuotientProblem,
    SpectrumPoint,
    critical_stats,
    fmt,
    solve_grid,
    spectrum_point,
)

FLOW_CSV_HEADER = ["alpha", "B", "q_c", "regime", "n", "k", "res_G1", "res_dG1", "base_b"]


def kac_transform(g: Potential, roof: Potential) -> Potential:
    """Fibre integral of an observable that is constant along fibres: ``g * tau``."""
    return product_potential(g, roof, name=f"kac({g.name};{roof.name})")


@dataclass(frozen=True)
class SuspensionProblem:
    """Flow under the roof ``roof`` with observable given by its fibre integral ``delta_g``."""

    model: MarkovSystem
    roof: Potential
    delta_g: Potential
    spec: TruncationSpec
    tolerances: Tolerances = DEFAULT_TOLERANCES

    def __post_init__(self):
        if not self.roof.eta > 0:
            raise ValueError(f"roof {self.roof.name!r} must be bounded below by a positive constant")

    @classmethod
    def from_fiber_constant(cls, model, g: Potential, roof: Potential, spec: TruncationSpec, tolerances: Tolerances = DEFAULT_TOLERANCES):
        """Build the problem for an observable ``g`` that does not depend on the fibre coordinate."""
        return cls(model, roof, kac_transform(g, roof), spec, tolerances)

    @property
    def base(self) -> QuotientProblem:
        return QuotientProblem(self.model, self.delta_g, self.roof, self.spec, self.tolerances)


@dataclass(frozen=True)
class FlowPoint:
    """A flow level: ``B`` is the flow dimension, ``base`` the underlying base solution."""

    alpha: float
    B: float
    base: SpectrumPoint

    @property
    def regime(self) -> str:
        return self.base.regime

    @property
    def q_c(self):
        return self.base.q_c

    def csv_row(self) -> list[str]:
        row = self.base.csv_row()
        row[1] = fmt(self.B)
        return row + [fmt(self.base.b)]


def lift(point: SpectrumPoint) -> FlowPoint:
    """The flow level set over a base level set adds the flow direction."""
    return FlowPoint(point.alpha, point.b + 1.0, point)


def flow_spectrum_point(problem: SuspensionProblem, alpha: float, tol: float = 1e-8) -> FlowPoint:
    return lift(spectrum_point(problem.base, alpha, tol))


def flow_spectrum(problem: SuspensionProblem, alphas: Iterable[float], tol: float = 1e-8, threads: int = 1) -> list[FlowPoint | None]:
    """Flow levels over a grid; ``None`` marks levels the truncation does not reach."""
    return [None if r.point is None else lift(r.point) for r in solve_grid(problem.base, alphas, tol, threads)]


@dataclass(frozen=True)
class FlowStats:
    """Flow-invariant quantities of the lift of a base equilibrium measure."""

    entropy: float
    average: float
    mean_roof: float
    base: EquilibriumStats


def flow_stats(base_stats: EquilibriumStats, roof: Potential, delta_g: Potential) -> FlowStats:
    """Entropy and ``g``-average of the lifted flow measure.

    The lifted measure is ``(nu x Leb) / int tau dnu``, so its entropy is
    ``h(nu) / int tau dnu`` and its ``g``-average is
    ``int Delta_g dnu / int tau dnu``.
    """
    mean_roof = base_stats.integrals[roof.name]
    return FlowStats(
        base_stats.entropy / mean_roof,
        base_stats.integrals[delta_g.name] / mean_roof,
        mean_roof,
        base_stats,
    )


def flow_point_stats(problem: SuspensionProblem, point: FlowPoint) -> FlowStats:
    return flow_stats(critical_stats(problem.base, point.base), problem.roof, problem.delta_g)


def write_flow_csv(path, points: Sequence[FlowPoint]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FLOW_CSV_HEADER)
        for p in points:
            w.writerow(p.csv_row())
