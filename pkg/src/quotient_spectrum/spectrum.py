"""Dimension spectrum of level sets of Birkhoff quotients.

For a numerator ``phi`` and a positive denominator ``psi`` the level set
``J(alpha)`` collects the points whose ratio of Birkhoff sums tends to
``alpha``.  Its dimension ``b(alpha)`` is found on a truncated system from the
three-parameter pressure

    G1(alpha, q, delta) = P(q (phi - alpha psi) - delta log|T'|).

With ``m(delta) = inf_q G1``, ``m`` is convex and decreasing in ``delta`` and
``b(alpha)`` is its zero.  When ``m`` stays nonnegative up to the dimension of
the truncated repeller, the level set has full dimension (regime J2);
otherwise the sign of the minimizing ``q`` separates regimes J1 (negative)
and J3 (positive).
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from .cylinders import TruncationSpec
from .models import MarkovSystem, Potential, power_digit_potential
from .pressure import (
    DEFAULT_TOLERANCES,
    Combination,
    ConvergenceError,
    EigenData,
    EquilibriumStats,
    PressureValue,
    Tolerances,
    TransferMatrix,
    cycle_mean_bounds,
    finiteness_test,
    pressure,
    probe_symbols,
    truncated_system,
)

REGIMES = ("J1", "J2", "J3")
CSV_HEADER = ["alpha", "b", "q_c", "regime", "n", "k", "res_G1", "res_dG1"]


class OutOfRangeError(ValueError):
    """The level is not achieved by the truncated system."""


@dataclass(frozen=True)
class QuotientProblem:
    """Ratio ``S_n phi / S_n psi`` on a truncated model."""

    model: MarkovSystem
    numerator: Potential
    denominator: Potential
    spec: TruncationSpec
    tolerances: Tolerances = DEFAULT_TOLERANCES

    def __post_init__(self):
        if not self.denominator.eta > 0:
            raise ValueError(f"denominator {self.denominator.name!r} must be bounded below by a positive constant")

    @property
    def system(self):
        return truncated_system(self.model, self.spec, self.tolerances)

    def dimension(self) -> float:
        """Dimension of the truncated repeller."""
        return self.system.bowen_dimension()

    def with_spec(self, spec: TruncationSpec) -> "QuotientProblem":
        return QuotientProblem(self.model, self.numerator, self.denominator, spec, self.tolerances)


@dataclass(frozen=True)
class SpectrumPoint:
    """One solved level: ``b`` is the dimension, ``q_c`` is ``None`` in J2."""

    alpha: float
    b: float
    q_c: float | None
    regime: str
    n: int
    k: int
    res_G1: float
    res_dG1: float | None

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")

    def csv_row(self) -> list[str]:
        return [
            fmt(self.alpha),
            fmt(self.b),
            "" if self.q_c is None else fmt(self.q_c),
            self.regime,
            str(self.n),
            str(self.k),
            fmt(self.res_G1),
            "" if self.res_dG1 is None else fmt(self.res_dG1),
        ]


def fmt(x: float) -> str:
    """Nine significant digits, the output precision of every artifact."""
    if x is None:
        return ""
    return f"{float(x):.9g}"


# ---------------------------------------------------------------------------
# G1 and the inner minimization
# ---------------------------------------------------------------------------


def g1_combination(problem: QuotientProblem, alpha: float, q: float, delta: float) -> Combination:
    logd = problem.system.log_derivative
    return Combination.of((q, problem.numerator), (-q * alpha, problem.denominator), (-delta, logd))


def G1(problem: QuotientProblem, alpha: float, q: float, delta: float) -> PressureValue:
    """``P(q (phi - alpha psi) - delta log|T'|)`` on the truncated system, ``+inf`` if divergent."""
    return pressure(problem.model, g1_combination(problem, alpha, q, delta), problem.spec, problem.tolerances)


@dataclass(frozen=True)
class _Eval:
    q: float
    value: float
    dq: float
    lyapunov: float
    eig: EigenData = field(repr=False)


@dataclass(frozen=True)
class _Minimum:
    q: float
    value: float
    dq: float
    lyapunov: float
    boundary: bool


class _LevelSolver:
    """Evaluates ``G1`` for one ``alpha`` with warm-started eigenvectors."""

    def __init__(self, problem: QuotientProblem, alpha: float, q_max: float = 1e4):
        self.problem = problem
        self.alpha = float(alpha)
        self.q_max = q_max
        sys_ = problem.system
        self.k = problem.spec.k
        phi = sys_.table(problem.numerator)
        psi = sys_.table(problem.denominator)
        self.diff = phi - self.alpha * psi
        self.logd = sys_.table(sys_.log_derivative)
        self.first_symbol = all(d == 1 for d in self.diff.shape[1:])
        self.warm: EigenData | None = None
        n = problem.spec.n
        model = problem.model
        cutoff = problem.tolerances.probe_cutoff
        d_ref = problem.dimension()
        # The slope of G1 in q tends to the extreme cycle means of phi - alpha psi.
        scale = max(1.0, float(np.max(np.abs(phi))), abs(self.alpha) * float(np.max(np.abs(psi))))
        _, top = cycle_mean_bounds(self.diff, n, self.k)
        _, neg_top = cycle_mean_bounds(-self.diff, n, self.k)
        self.flat = abs(top) <= 1e-12 * scale and abs(neg_top) <= 1e-12 * scale
        if self.flat:
            # every cycle has ratio alpha: G1 does not depend on q
            self.allow_pos = self.allow_neg = False
            return
        if top <= 0.0 or neg_top <= 0.0:
            raise OutOfRangeError(
                f"alpha={alpha:g}: no cycle of the truncated system has ratio on both sides of alpha"
            )
        self.allow_pos = finiteness_test(model, g1_combination(problem, alpha, 1.0, d_ref), cutoff)
        self.allow_neg = finiteness_test(model, g1_combination(problem, alpha, -1.0, d_ref), cutoff)
        vals = [self.evaluate(q, d_ref).value for q in (-1.0, 0.0, 1.0)]
        spread = max(vals) - min(vals)
        if spread <= 1e-12 * max(1.0, max(abs(v) for v in vals)):
            self.flat = True

    def evaluate(self, q: float, delta: float) -> _Eval:
        w = np.multiply(self.logd, -delta)
        if q != 0.0:
            w = w + q * self.diff
        w = np.ascontiguousarray(np.broadcast_to(w, (self.problem.spec.n,) * self.k), dtype=float).copy()
        tm = TransferMatrix(w, self.k)
        tol = self.problem.tolerances
        eig = tm.leading(tol.power_tol, tol.vector_tol, tol.max_iter, self.warm)
        self.warm = eig
        mu = tm.edge_measure(eig)
        n = self.problem.spec.n
        if self.first_symbol:
            dq = float(mu.reshape(n, -1).sum(axis=1) @ self.diff.reshape(-1))
        else:
            dq = float(np.sum(mu * self.diff))
        lyap = float(np.sum(mu * self.logd))
        return _Eval(q, eig.log_rho, dq, lyap, eig)

    def _allowed(self, q: float) -> bool:
        return q == 0.0 or (q > 0 and self.allow_pos) or (q < 0 and self.allow_neg)

    def minimize(self, delta: float, guess: float = 0.0) -> _Minimum:
        """``inf_q G1`` on the closed allowed half-line(s) of ``q``."""
        if self.flat or not (self.allow_pos or self.allow_neg):
            e = self.evaluate(0.0, delta)
            return _Minimum(0.0, e.value, e.dq, e.lyapunov, True)
        cache: dict[float, _Eval] = {}

        def ev(q):
            q = float(q)
            if q not in cache:
                cache[q] = self.evaluate(q, delta)
            return cache[q]

        q0 = guess if self._allowed(guess) else 0.0
        e0 = ev(q0)
        if e0.dq == 0.0:
            return _Minimum(q0, e0.value, e0.dq, e0.lyapunov, q0 == 0.0)
        direction = -1.0 if e0.dq > 0 else 1.0
        if q0 == 0.0 and not self._allowed(direction):
            return _Minimum(0.0, e0.value, e0.dq, e0.lyapunov, True)
        step = max(0.25, 0.05 * abs(q0))
        qa, ea = q0, e0
        while True:
            qb = qa + direction * step
            if qa != 0.0 and np.sign(qb) != np.sign(qa) and not self._allowed(qb):
                qb = 0.0
            eb = ev(qb)
            if eb.dq == 0.0:
                return _Minimum(qb, eb.value, eb.dq, eb.lyapunov, False)
            if np.sign(eb.dq) != np.sign(ea.dq):
                break
            if qb == 0.0:
                return _Minimum(0.0, eb.value, eb.dq, eb.lyapunov, True)
            if abs(qb) > self.q_max:
                raise OutOfRangeError(
                    f"alpha={self.alpha:g}: G1 keeps decreasing beyond |q| = {self.q_max:g}"
                )
            qa, ea = qb, eb
            step *= 2.0
        lo, hi = sorted((qa, qb))
        root = brentq(lambda q: ev(q).dq, lo, hi, xtol=1e-13 * (1.0 + abs(lo) + abs(hi)), rtol=1e-15, maxiter=200)
        e = ev(root)
        return _Minimum(root, e.value, e.dq, e.lyapunov, False)


def spectrum_point(problem: QuotientProblem, alpha: float, tol: float = 1e-8, *, q_max: float = 1e4) -> SpectrumPoint:
    """Solve ``G1 = 0`` and ``dG1/dq = 0`` at one level ``alpha``.

    Raises :class:`OutOfRangeError` when the truncated system does not reach
    ``alpha``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    dim = problem.dimension()
    n, k = problem.spec.n, problem.spec.k
    solver = _LevelSolver(problem, alpha, q_max)
    eps = max(tol, 1e-4)
    top = solver.minimize(dim - eps)
    if top.value >= 0.0:
        bowen_res = solver.evaluate(0.0, dim).value
        return SpectrumPoint(float(alpha), dim, None, "J2", n, k, bowen_res, None)
    lo, hi = 0.0, dim - eps
    delta, cur = hi, top
    for _ in range(200):
        if cur.value < 0:
            hi = delta
        else:
            lo = delta
        if abs(cur.value) <= 0.1 * tol * cur.lyapunov or hi - lo <= 0.1 * tol:
            break
        nxt = delta + cur.value / cur.lyapunov
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        delta = nxt
        cur = solver.minimize(delta, cur.q)
    else:
        raise ConvergenceError(f"alpha={alpha:g}: delta iteration did not converge")
    if cur.boundary or cur.q == 0.0:
        # Cannot happen for a genuine interior solution: with q = 0 the
        # pressure is positive below the repeller dimension.
        raise ConvergenceError(f"alpha={alpha:g}: minimizer stuck at q = 0 below the repeller dimension")
    regime = "J1" if cur.q < 0 else "J3"
    return SpectrumPoint(float(alpha), float(delta), float(cur.q), regime, n, k, float(cur.value), float(cur.dq))


@dataclass(frozen=True)
class LevelBracket:
    """``b`` on both sides of a level, at the smallest offset where both solve."""

    alpha: float
    eps: float
    below: SpectrumPoint
    above: SpectrumPoint

    @property
    def bounds(self) -> tuple[float, float]:
        return min(self.below.b, self.above.b), max(self.below.b, self.above.b)


def level_bracket(problem: QuotientProblem, alpha: float, eps_values: Sequence[float] = (1e-2, 1e-3, 1e-4), tol: float = 1e-8) -> LevelBracket:
    """Bracket ``[b(alpha - eps), b(alpha + eps)]`` for levels inside ``E``.

    At such levels the dimension is a limit over neighbouring levels, so a
    single value is not reported.  Offsets are tried from large to small and
    the smallest one at which both neighbours solve is returned.
    """
    best = None
    for eps in sorted(eps_values, reverse=True):
        try:
            lo = spectrum_point(problem, alpha - eps, tol)
            hi = spectrum_point(problem, alpha + eps, tol)
        except (OutOfRangeError, ConvergenceError):
            continue
        best = LevelBracket(float(alpha), float(eps), lo, hi)
    if best is None:
        raise OutOfRangeError(f"alpha={alpha:g}: no offset resolves both neighbouring levels")
    return best


def critical_stats(problem: QuotientProblem, point: SpectrumPoint) -> EquilibriumStats:
    """Equilibrium statistics at the solved ``(q_c, b)``, or at ``(0, b)`` in J2."""
    q = point.q_c or 0.0
    combo = g1_combination(problem, point.alpha, q, point.b)
    stats, _ = problem.system.equilibrium(combo, (problem.numerator, problem.denominator))
    return stats


# ---------------------------------------------------------------------------
# Grids and regimes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridResult:
    alpha: float
    point: SpectrumPoint | None
    error: str | None = None


def _solve_safe(problem, alpha, tol, q_max) -> GridResult:
    try:
        return GridResult(alpha, spectrum_point(problem, alpha, tol, q_max=q_max))
    except (OutOfRangeError, ConvergenceError) as exc:
        return GridResult(alpha, None, f"{type(exc).__name__}: {exc}")


def solve_grid(problem: QuotientProblem, alphas: Iterable[float], tol: float = 1e-8, threads: int = 1, q_max: float = 1e4) -> list[GridResult]:
    """Solve every level, in parallel threads, merged in grid order."""
    alphas = [float(a) for a in alphas]
    problem.dimension()  # shared state is built once before the workers start
    sys_ = problem.system
    sys_.table(problem.numerator)
    sys_.table(problem.denominator)
    sys_.table(sys_.log_derivative)
    if threads <= 1:
        return [_solve_safe(problem, a, tol, q_max) for a in alphas]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda a: _solve_safe(problem, a, tol, q_max), alphas))


def default_grid(alpha_min: float, alpha_max: float, points: int = 65) -> np.ndarray:
    """Uniform interior grid avoiding the degenerate endpoints."""
    if not (math.isfinite(alpha_min) and math.isfinite(alpha_max)) or alpha_max <= alpha_min:
        raise ValueError("default grid needs a finite, nonempty range")
    h = (alpha_max - alpha_min) / 128.0
    return np.linspace(alpha_min + h, alpha_max - h, points)


@dataclass
class RegimeReport:
    points: list[SpectrumPoint]
    out_of_range: list[float]
    intervals: dict[str, tuple[float, float] | None]
    j2_contiguous: bool
    offending: list[float]
    e_inside_j2: bool | None = None
    reach: dict[str, tuple[float, float]] = field(default_factory=dict)


def classify_regimes(
    problem: QuotientProblem,
    grid: Sequence[float],
    tol: float = 1e-8,
    threads: int = 1,
    refine_steps: int = 6,
    summary: "BoundarySummary | None" = None,
) -> RegimeReport:
    """Tag every grid point and locate regime endpoints by bisection.

    J2 tags must form one contiguous run; otherwise the offending points are
    reported (a truncation artifact, never an exception).  ``e_inside_j2``
    tells whether ``E`` from ``summary`` fits in the J2 run once its edges
    are allowed to move within their bisection brackets (or out to the
    range ends when J2 is the first or last regime on the grid).
    """
    results = solve_grid(problem, grid, tol, threads)
    pts = [r.point for r in results if r.point is not None]
    oor = [r.alpha for r in results if r.point is None]
    tags = [p.regime for p in pts]
    j2_idx = [i for i, t in enumerate(tags) if t == "J2"]
    offending: list[float] = []
    contiguous = True
    if j2_idx:
        run = range(j2_idx[0], j2_idx[-1] + 1)
        offending = [pts[i].alpha for i in run if tags[i] != "J2"]
        contiguous = not offending

    def tag_at(a):
        r = _solve_safe(problem, a, tol, 1e4)
        return None if r.point is None else r.point.regime

    # transitions between neighbours with different tags, kept as brackets
    cuts: list[tuple[str, str, float, float]] = []
    for i in range(len(pts) - 1):
        left, right = pts[i], pts[i + 1]
        if left.regime == right.regime:
            continue
        lo, hi = left.alpha, right.alpha
        for _ in range(refine_steps):
            mid = 0.5 * (lo + hi)
            t = tag_at(mid)
            if t == left.regime:
                lo = mid
            elif t == right.regime:
                hi = mid
            else:
                break
        cuts.append((left.regime, right.regime, lo, hi))
    intervals: dict[str, tuple[float, float] | None] = {}
    # widest interval compatible with the tags: regime edges may sit anywhere in their brackets
    reach: dict[str, tuple[float, float]] = {}
    edge_lo = summary.alpha_min if summary is not None else (pts[0].alpha if pts else math.nan)
    edge_hi = summary.alpha_max if summary is not None else (pts[-1].alpha if pts else math.nan)
    for reg in REGIMES:
        members = [p.alpha for p in pts if p.regime == reg]
        if not members:
            intervals[reg] = None
            continue
        lo, hi = min(members), max(members)
        r_lo, r_hi = lo, hi
        for a, b, c_lo, c_hi in cuts:
            if b == reg and c_hi <= lo:
                lo = min(lo, 0.5 * (c_lo + c_hi))
                r_lo = min(r_lo, c_lo)
            if a == reg and c_lo >= hi:
                hi = max(hi, 0.5 * (c_lo + c_hi))
                r_hi = max(r_hi, c_hi)
        if pts and pts[0].regime == reg and pts[0].alpha == min(members):
            r_lo = min(r_lo, edge_lo)
        if pts and pts[-1].regime == reg and pts[-1].alpha == max(members):
            r_hi = max(r_hi, edge_hi)
        intervals[reg] = (lo, hi)
        reach[reg] = (r_lo, r_hi)
    e_inside = None
    if summary is not None and summary.E is not None and "J2" in reach:
        e_lo, e_hi = summary.E
        r_lo, r_hi = reach["J2"]
        e_inside = contiguous and r_lo <= e_lo and e_hi <= r_hi
    return RegimeReport(pts, oor, intervals, contiguous, offending, e_inside, reach)


def write_spectrum_csv(path, points: Sequence[SpectrumPoint]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for p in points:
            w.writerow(p.csv_row())


# ---------------------------------------------------------------------------
# Boundary quantities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundarySummary:
    """Range of attainable ratios and the limits at the accumulation point.

    ``E`` is ``None`` for finite alphabets; ``U`` lists the open intervals of
    ``(alpha_min, alpha_max)`` outside ``E``.
    """

    alpha_min: float
    alpha_max: float
    alpha_lower: float | None
    alpha_upper: float | None
    E: tuple[float, float] | None
    U: tuple[tuple[float, float], ...]
    min_orbit: tuple[int, ...]
    max_orbit: tuple[int, ...]
    diverges: bool = False


def wynn_epsilon(seq: Sequence[float]) -> list[list[float]]:
    """Even columns ``eps_0, eps_2, ...`` of Wynn's epsilon table."""
    s = [float(v) for v in seq]
    prev = [0.0] * (len(s) + 1)
    cur = list(s)
    cols = [cur]
    k = 0
    while len(cur) > 1:
        nxt = []
        for i in range(len(cur) - 1):
            d = cur[i + 1] - cur[i]
            if d == 0.0:
                nxt.append(math.inf)
            else:
                nxt.append(prev[i + 1] + 1.0 / d)
        prev, cur = cur, nxt
        k += 1
        if k % 2 == 0:
            cols.append(cur)
    return cols


def extrapolate_limits(values: Sequence[float], depth: int = 2) -> tuple[float, float]:
    """Estimate liminf/limsup of a slowly converging sequence.

    The sequence is accelerated with the ``depth``-th even column of the
    Wynn epsilon table (Shanks transform), which removes geometric and
    ``j * r**j`` error terms exactly.  The spread of the last three
    accelerated values gives the (liminf, limsup) estimate.
    """
    cols = wynn_epsilon(values)
    col = cols[min(depth, len(cols) - 1)]
    tail = [v for v in col[-3:] if math.isfinite(v)]
    if not tail:
        tail = [float(values[-1])]
    return min(tail), max(tail)


def _orbit_ratio(problem: QuotientProblem, words: np.ndarray) -> np.ndarray:
    """Ratios of Birkhoff sums along the periodic orbits coded by the rows of ``words``."""
    model = problem.model
    phi, psi = problem.numerator, problem.denominator
    m = words.shape[1]
    if phi.first_symbol and psi.first_symbol:
        num = sum(phi.branch_values(words[:, j]) for j in range(m))
        den = sum(psi.branch_values(words[:, j]) for j in range(m))
        return num / den
    num = np.zeros(words.shape[0])
    den = np.zeros(words.shape[0])
    for j in range(m):
        rot = np.roll(words, -j, axis=1)
        x = model.periodic_points(rot)
        num += phi.values_at(rot[:, 0], x)
        den += psi.values_at(rot[:, 0], x)
    return num / den


def boundary_summary(problem: QuotientProblem, probe_cutoff: int = 10**5, pair_cutoff: int = 40) -> BoundarySummary:
    """Extreme ratios over short periodic orbits and limits at the accumulation point."""
    if probe_cutoff < 1:
        raise ValueError("probe cutoff must be >= 1")
    model = problem.model
    phi, psi = problem.numerator, problem.denominator
    fast = phi.first_symbol and psi.first_symbol
    top = probe_cutoff if fast else min(probe_cutoff, 400)
    if model.is_finite:
        top = min(top, int(model.branch_count))
    singles = np.arange(1, top + 1, dtype=np.int64)[:, None]
    r1 = _orbit_ratio(problem, singles)
    p = min(pair_cutoff, top)
    a, b = np.meshgrid(np.arange(1, p + 1), np.arange(1, p + 1), indexing="ij")
    mask = a < b
    pairs = np.stack([a[mask], b[mask]], axis=1).astype(np.int64)
    r2 = _orbit_ratio(problem, pairs) if len(pairs) else np.empty(0)
    cands = [(float(v), (int(singles[i, 0]),)) for i, v in ((int(np.argmin(r1)), r1.min()), (int(np.argmax(r1)), r1.max()))]
    if len(r2):
        i_lo, i_hi = int(np.argmin(r2)), int(np.argmax(r2))
        cands += [(float(r2[i_lo]), tuple(int(s) for s in pairs[i_lo])), (float(r2[i_hi]), tuple(int(s) for s in pairs[i_hi]))]
    lo_val, lo_word = min(cands, key=lambda c: (c[0], len(c[1])))
    hi_val, hi_word = max(cands, key=lambda c: (c[0], -len(c[1])))
    if model.is_finite:
        return BoundarySummary(lo_val, hi_val, None, None, None, ((lo_val, hi_val),), lo_word, hi_word, False)
    # branch ratios toward the accumulation point
    sym = probe_symbols(probe_cutoff)
    ratios = phi.branch_values(sym) / psi.branch_values(sym)
    diverges = False
    tail = np.abs(ratios[-6:])
    if np.all(np.diff(tail) > 0) and tail[-1] >= 2.0 * max(tail[-4], 1e-300) and tail[-1] > 1.0:
        diverges = True
        if ratios[-1] > 0:
            lower, upper = math.inf, math.inf
            hi_val, hi_word = math.inf, ()
        else:
            lower, upper = -math.inf, -math.inf
            lo_val, lo_word = -math.inf, ()
    else:
        lower, upper = extrapolate_limits(ratios[-9:])
        lower = max(lower, lo_val)
        upper = min(upper, hi_val)
    E = (lower, upper)
    U = tuple(iv for iv in ((lo_val, lower), (upper, hi_val)) if iv[1] > iv[0])
    return BoundarySummary(lo_val, hi_val, lower, upper, E, U, lo_word, hi_word, diverges)


def endpoint_dimension(summary: BoundarySummary, which: str) -> float | None:
    """Dimension 0 at an endpoint attained by a single periodic orbit, else ``None``."""
    word = summary.min_orbit if which == "min" else summary.max_orbit
    return 0.0 if word else None


def weighted_digit_pair(gamma: float, rho: float) -> tuple[Potential, Potential]:
    """``(a**min, a**max)`` so that the branch ratio is ``a**-|gamma - rho|``."""
    lo, hi = sorted((float(gamma), float(rho)))
    return power_digit_potential(lo), power_digit_potential(hi)


# ---------------------------------------------------------------------------
# Approach to a discontinuity
# ---------------------------------------------------------------------------


@dataclass
class DiscontinuityReport:
    side: str
    alphas: list[float]
    points: list[SpectrumPoint]
    out_of_range: list[float]
    dimension: float
    sup_b: float | None
    gap: float | None
    monotone: bool | None

    @property
    def empty(self) -> bool:
        return not self.points


def discontinuity_probe(problem: QuotientProblem, side: str, alphas: Sequence[float], tol: float = 1e-8, threads: int = 1) -> DiscontinuityReport:
    """Evaluate ``b`` along levels approaching 0 and compare with the repeller dimension.

    ``side`` is ``"left"`` (levels below 0) or ``"right"``.  Levels the
    truncated system does not reach are collected, not raised.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    alphas = sorted(float(a) for a in alphas)
    results = solve_grid(problem, alphas, tol, threads)
    pts = [r.point for r in results if r.point is not None]
    oor = [r.alpha for r in results if r.point is None]
    dim = problem.dimension()
    if not pts:
        return DiscontinuityReport(side, alphas, [], oor, dim, None, None, None)
    bs = [p.b for p in pts]
    sup_b = max(bs)
    # toward 0 means increasing alpha on the left, decreasing on the right
    toward = bs if side == "left" else bs[::-1]
    monotone = all(y >= x - 1e-9 for x, y in zip(toward, toward[1:]))
    return DiscontinuityReport(side, alphas, pts, oor, dim, sup_b, dim - sup_b, monotone)
