"""Truncated topological pressure, equilibrium statistics and Bowen roots.

The pressure of a finite linear combination of potentials on the truncated
repeller is computed as the log of the leading eigenvalue of a depth-k
transfer matrix.  States are words of length ``k - 1``; the edge labelled by
a depth-k word carries ``exp`` of the combination at the word's
representative.  For ``k = 1`` there is a single state and the pressure is
``log sum_a exp(f(a))``.

For infinite alphabets a finiteness pre-test on the one-symbol series is run
first; a divergent series yields ``+inf`` without building any matrix.
"""
from __future__ import annotations

import math
import threading
import weakref
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import brentq

from .cylinders import TruncationSpec
from .models import MarkovSystem, Potential


class ConvergenceError(RuntimeError):
    """Eigen-iteration or root finding failed to converge."""


class InconclusiveError(RuntimeError):
    """The finiteness probe saw a non-monotone tail and cannot decide."""


@dataclass(frozen=True)
class Tolerances:
    """Numerical knobs shared by the pressure and spectrum solvers.

    Attributes
    ----------
    power_tol:
        Relative change of successive Rayleigh quotients that stops power iteration.
    vector_tol:
        Sup-norm change of the normalized eigenvectors that must also be reached.
    max_iter:
        Power-iteration cap.
    probe_cutoff:
        Largest symbol inspected by the finiteness probe.
    sinf_tol:
        Absolute tolerance of the finiteness-abscissa bisection.
    bowen_tol:
        Absolute tolerance of Bowen roots.
    entropy_tol:
        Allowed disagreement between the two entropy formulas.
    """

    power_tol: float = 1e-13
    vector_tol: float = 1e-10
    max_iter: int = 100_000
    probe_cutoff: int = 10**6
    sinf_tol: float = 1e-4
    bowen_tol: float = 1e-12
    entropy_tol: float = 1e-8


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class Combination:
    """A finite linear combination ``sum c_i p_i`` of potentials."""

    terms: tuple[tuple[float, Potential], ...]

    @classmethod
    def of(cls, *pairs: tuple[float, Potential]) -> "Combination":
        merged: dict[int, list] = {}
        for c, p in pairs:
            if id(p) in merged:
                merged[id(p)][0] += float(c)
            else:
                merged[id(p)] = [float(c), p]
        return cls(tuple((c, p) for c, p in merged.values()))

    def __iter__(self):
        return iter(self.terms)

    def error_bound(self, k: int) -> float:
        return float(sum(abs(c) * p.variation_bound(k) for c, p in self.terms if c != 0.0))


def combination(*pairs: tuple[float, Potential]) -> Combination:
    return Combination.of(*pairs)


def geometric_combination(model: MarkovSystem, s: float) -> Combination:
    """``-s log|T'|``."""
    return Combination.of((-float(s), model.log_derivative_potential()))


@dataclass(frozen=True)
class PressureValue:
    """Extended-real pressure with a depth-k error bar."""

    value: float
    error_bound: float = 0.0

    def __post_init__(self):
        if math.isfinite(self.value) and not self.error_bound >= 0:
            raise ValueError("error_bound must be nonnegative")

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class EquilibriumStats:
    """Entropy, Lyapunov exponent and potential integrals of an equilibrium state."""

    pressure: float
    entropy: float
    lyapunov: float
    integrals: Mapping[str, float]
    first_symbol_measure: np.ndarray | None = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class EigenData:
    """Leading eigen-data of a transfer matrix (vectors normalized to sup-norm 1)."""

    log_rho: float
    right: np.ndarray
    left: np.ndarray
    iterations: int


# ---------------------------------------------------------------------------
# Transfer matrices
# ---------------------------------------------------------------------------


class TransferMatrix:
    """Depth-k transfer matrix built from a table of log-weights.

    ``log_weights`` has shape ``(n,) * k``; entry ``[a1, ..., ak]`` is the log
    weight of the edge from state ``(a1..a_{k-1})`` to ``(a2..ak)``.  The
    weights are stored shifted by their maximum to avoid overflow.  The table
    is consumed (exponentiated in place).
    """

    def __init__(self, log_weights: np.ndarray, k: int):
        if not np.all(np.isfinite(log_weights)):
            raise ValueError("transfer weights must be finite")
        self.k = k
        self.n = log_weights.shape[0]
        self.shift = float(np.max(log_weights))
        log_weights -= self.shift
        np.exp(log_weights, out=log_weights)
        self.weights = log_weights
        n = self.n
        if k >= 3:
            self._w3 = self.weights.reshape(n, n ** (k - 2), n)
        self.state_count = 1 if k == 1 else n ** (k - 1)

    def apply_right(self, v: np.ndarray) -> np.ndarray:
        k, n = self.k, self.n
        if k == 2:
            return self.weights @ v
        m = n ** (k - 2)
        return np.einsum("imj,mj->im", self._w3, v.reshape(m, n), optimize=False).ravel()

    def apply_left(self, u: np.ndarray) -> np.ndarray:
        k, n = self.k, self.n
        if k == 2:
            return u @ self.weights
        m = n ** (k - 2)
        return np.einsum("im,imj->mj", u.reshape(n, m), self._w3, optimize=False).ravel()

    def leading(
        self,
        tol: float = 1e-13,
        vector_tol: float = 1e-10,
        max_iter: int = 100_000,
        start: EigenData | None = None,
    ) -> EigenData:
        """Power iteration on both sides with sup-norm normalization.

        The eigenvalue estimate is the two-sided Rayleigh quotient
        ``u.Mv / u.v``.  Iteration stops once successive estimates agree to
        ``tol`` (relative) and both vectors move by less than ``vector_tol``.
        """
        if self.k == 1:
            rho = float(np.sum(self.weights))
            one = np.ones(1)
            return EigenData(self.shift + math.log(rho), one, one, 0)
        size = self.state_count
        if start is not None and start.right.shape == (size,):
            v = start.right.copy()
            u = start.left.copy()
        else:
            v = np.ones(size)
            u = np.ones(size)
        prev = None
        for it in range(1, max_iter + 1):
            mv = self.apply_right(v)
            um = self.apply_left(u)
            uv = float(u @ v)
            if not (uv > 0 and math.isfinite(uv)):
                raise ConvergenceError("left and right iterates became orthogonal (weights underflowed)")
            rq = float(u @ mv) / uv
            mv_max = mv.max()
            um_max = um.max()
            if not (mv_max > 0 and um_max > 0):
                raise ConvergenceError("transfer matrix annihilated the iterate")
            mv /= mv_max
            um /= um_max
            dv = float(np.max(np.abs(mv - v)))
            du = float(np.max(np.abs(um - u)))
            v, u = mv, um
            if prev is not None and abs(rq - prev) <= tol * rq and max(dv, du) <= vector_tol:
                return EigenData(self.shift + math.log(rq), v, u, it)
            prev = rq
        raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations")

    def edge_measure(self, eig: EigenData) -> np.ndarray:
        """Equilibrium measure of depth-k cylinders, shape ``(n,) * k``."""
        n, k = self.n, self.k
        if k == 1:
            return self.weights / np.sum(self.weights)
        u, v = eig.left, eig.right
        if k == 2:
            mu = u[:, None] * self.weights * v[None, :]
        else:
            m = n ** (k - 2)
            mu = u.reshape(n, m)[:, :, None] * self._w3 * v.reshape(m, n)[None, :, :]
        mu = mu.reshape((n,) * k)
        return mu / np.sum(mu)

    def stationarity_defect(self, eig: EigenData, mu: np.ndarray) -> float:
        """Difference between the two Markov entropy formulas.

        ``sum (pi_tail - pi_head) log v`` vanishes for exact eigenvectors,
        where ``pi_head``/``pi_tail`` are the state marginals of the edge
        measure at the edge's source and target.
        """
        if self.k == 1:
            return 0.0
        n, k = self.n, self.k
        head = mu.reshape(n ** (k - 1), n).sum(axis=1)
        tail = mu.reshape(n, n ** (k - 1)).sum(axis=0)
        v = eig.right
        logv = np.where(v > 0, np.log(np.where(v > 0, v, 1.0)), 0.0)
        return float(np.dot(tail - head, logv))


# ---------------------------------------------------------------------------
# Truncated systems
# ---------------------------------------------------------------------------


def cycle_mean_bounds(table: np.ndarray, n: int, k: int, max_iter: int = 400) -> tuple[float, float]:
    """Bounds on the largest mean weight of a cycle of words.

    ``table`` is broadcastable to ``(n,) * k`` and weighs the transition from
    ``w[:-1]`` to ``w[1:]``.  Max-plus value iteration gives, for every step
    count ``p``, ``min_i (x_{m+p} - x_m)_i / p <= mean <= max_i (...) / p``.
    Iteration stops as soon as both bounds have the same sign.
    """
    t = np.broadcast_to(np.asarray(table, dtype=float), (n,) * k)
    if k == 1 or all(d == 1 for d in np.shape(table)[1:]):
        # Weights depend on the first symbol only, so the best cycle repeats one symbol.
        top = float(np.max(t))
        return top, top
    x = np.zeros((n,) * (k - 1))
    lo, hi = -math.inf, math.inf
    for m in range(1, max_iter + 1):
        nxt = np.max(t + x[None, ...], axis=-1)
        step = nxt - x
        total = nxt / m
        lo = max(lo, float(step.min()), float(total.min()))
        hi = min(hi, float(step.max()), float(total.max()))
        x = nxt
        if lo > 0 or hi < 0 or hi - lo <= 1e-14 * max(1.0, abs(hi)):
            break
    return lo, hi


def _integrate(mu: np.ndarray, table: np.ndarray, first_marginal: np.ndarray) -> float:
    if table.ndim == 0:
        return float(table)
    if all(d == 1 for d in table.shape[1:]):
        return float(first_marginal @ table.reshape(-1))
    return float(np.sum(mu * table))


class TruncatedSystem:
    """A model restricted to ``{1..n}`` at depth ``k`` with cached potential tables.

    Tables are cached per potential object.  All methods are safe to call from
    several threads; warm starts are passed explicitly so results do not
    depend on scheduling.
    """

    def __init__(self, model: MarkovSystem, spec: TruncationSpec, tolerances: Tolerances | None = None):
        if spec.n > model.branch_count:
            raise ValueError(f"truncation {spec.n} exceeds the {model.branch_count} branches of {model.name!r}")
        spec.check_budget()
        self.model = model
        self.spec = spec
        self.tol = tolerances or DEFAULT_TOLERANCES
        self._tables: dict[int, tuple[Potential, np.ndarray]] = {}
        self._lock = threading.Lock()
        self._bowen: float | None = None

    def table(self, potential: Potential) -> np.ndarray:
        key = id(potential)
        with self._lock:
            hit = self._tables.get(key)
            if hit is not None:
                return hit[1]
        t = np.asarray(potential.block_table(self.spec.n, self.spec.k), dtype=float)
        t.setflags(write=False)
        with self._lock:
            self._tables.setdefault(key, (potential, t))
            return self._tables[key][1]

    def log_weights(self, combo: Combination) -> np.ndarray:
        """The combination's table as a fresh, full-shape array."""
        shape = (self.spec.n,) * self.spec.k
        out = np.zeros(shape)
        for c, p in combo:
            if c == 0.0:
                continue
            out += c * self.table(p)
        return out

    def transfer_matrix(self, combo: Combination) -> TransferMatrix:
        return TransferMatrix(self.log_weights(combo), self.spec.k)

    def _eigen(self, tm: TransferMatrix, start: EigenData | None, vector_tol: float | None = None) -> EigenData:
        return tm.leading(self.tol.power_tol, vector_tol or self.tol.vector_tol, self.tol.max_iter, start)

    def pressure(self, combo: Combination, start: EigenData | None = None) -> tuple[PressureValue, EigenData]:
        tm = self.transfer_matrix(combo)
        eig = self._eigen(tm, start)
        return PressureValue(eig.log_rho, combo.error_bound(self.spec.k)), eig

    def equilibrium(
        self,
        combo: Combination,
        tracked: Iterable[Potential] = (),
        start: EigenData | None = None,
    ) -> tuple[EquilibriumStats, EigenData]:
        """Equilibrium statistics of the combination on the truncated system."""
        tm = self.transfer_matrix(combo)
        eig = self._eigen(tm, start)
        vtol = self.tol.vector_tol
        for _ in range(4):
            mu = tm.edge_measure(eig)
            defect = tm.stationarity_defect(eig, mu)
            if abs(defect) <= self.tol.entropy_tol:
                break
            vtol *= 1e-2
            eig = self._eigen(tm, eig, vector_tol=max(vtol, 1e-15))
        else:
            raise ConvergenceError(f"entropy formulas disagree by {defect:.3g}")
        n = self.spec.n
        first = mu.reshape(n, -1).sum(axis=1)
        integrals: dict[str, float] = {}
        weighted = 0.0
        for c, p in combo:
            val = _integrate(mu, self.table(p), first)
            integrals[p.name] = val
            weighted += c * val
        for p in tracked:
            if p.name not in integrals:
                integrals[p.name] = _integrate(mu, self.table(p), first)
        if "log-derivative" in integrals:
            lyap = integrals["log-derivative"]
        else:
            lyap = _integrate(mu, self.table(self._cached_log_derivative()), first)
        entropy = eig.log_rho - weighted
        stats = EquilibriumStats(eig.log_rho, entropy, lyap, integrals, first)
        return stats, eig

    def _cached_log_derivative(self) -> Potential:
        with self._lock:
            pot = getattr(self, "_logd_pot", None)
            if pot is None:
                pot = self.model.log_derivative_potential()
                self._logd_pot = pot
            return pot

    @property
    def log_derivative(self) -> Potential:
        return self._cached_log_derivative()

    def bowen_dimension(self, tol: float | None = None) -> float:
        """Root of ``s -> P(-s log|T'|)`` on the truncated system (cached)."""
        tol = tol or self.tol.bowen_tol
        with self._lock:
            if self._bowen is not None and tol >= self.tol.bowen_tol:
                return self._bowen
        root = _bowen_root(self, tol)
        if tol >= self.tol.bowen_tol:
            with self._lock:
                self._bowen = root
        return root


_SYSTEMS: "weakref.WeakKeyDictionary[MarkovSystem, dict]" = weakref.WeakKeyDictionary()
_SYSTEMS_LOCK = threading.Lock()


def truncated_system(model: MarkovSystem, spec: TruncationSpec, tolerances: Tolerances | None = None) -> TruncatedSystem:
    """Shared :class:`TruncatedSystem` for a model, spec and tolerance set."""
    tolerances = tolerances or DEFAULT_TOLERANCES
    with _SYSTEMS_LOCK:
        per_model = _SYSTEMS.setdefault(model, {})
        key = (spec, tolerances)
        sys_ = per_model.get(key)
        if sys_ is None:
            sys_ = TruncatedSystem(model, spec, tolerances)
            per_model[key] = sys_
        return sys_


def _bowen_root(system: TruncatedSystem, tol: float) -> float:
    if system.spec.n == 1:
        # One branch: a single fixed point, pressure is -s * lambda with root 0.
        return 0.0
    logd = system.log_derivative
    warm: list[EigenData | None] = [None]

    def f(s):
        val, eig = system.pressure(Combination.of((-s, logd)), warm[0])
        warm[0] = eig
        return val.value

    lo, hi = 0.0, 1.0
    f_hi = f(hi)
    expansions = 0
    while f_hi > 0:
        lo, hi = hi, 2.0 * hi
        f_hi = f(hi)
        expansions += 1
        if expansions > 30:
            raise ConvergenceError("Bowen root not bracketed")
    if f_hi == 0.0:
        return hi
    return float(brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500))


# ---------------------------------------------------------------------------
# Finiteness of the one-symbol series
# ---------------------------------------------------------------------------


def probe_symbols(cutoff: int) -> np.ndarray:
    """Geometric probe ``1, 2, 4, ...`` up to ``cutoff`` (inclusive)."""
    j = int(math.floor(math.log2(cutoff)))
    pts = [2**i for i in range(j + 1)]
    if pts[-1] != cutoff:
        pts.append(int(cutoff))
    return np.asarray(pts, dtype=np.int64)


def branch_log_terms(combo: Combination, symbols: np.ndarray) -> np.ndarray:
    """Log of the one-symbol terms ``exp(f(inv_a 1))`` at the given symbols."""
    total = np.zeros(len(symbols))
    for c, p in combo:
        if c != 0.0:
            total = total + c * p.branch_values(symbols)
    return total


def finiteness_test(model: MarkovSystem, combo: Combination, probe_cutoff: int = 10**6, tail: int = 6) -> bool:
    """Whether the one-symbol series ``sum_a exp(f on I_a)`` converges.

    The log-terms are sampled on a doubling probe of symbols.  Over the last
    ``tail`` probe points the log-terms may change direction at most once
    (a linear term in the symbol eventually beats a logarithmic one); the
    verdict is read from the last two steps.  A tail that increases or stays
    flat diverges; a decreasing tail converges when the local power-law
    exponent over the last doubling exceeds 1.  A tail that turns more than
    once is reported as inconclusive.
    """
    if model.is_finite:
        return True
    if probe_cutoff < 2 ** (tail + 1):
        raise ValueError("probe cutoff too small for a tail test")
    a = probe_symbols(probe_cutoff)
    logs = branch_log_terms(combo, a)
    if np.any(np.isnan(logs)):
        raise InconclusiveError("undefined terms in the one-symbol series")
    if np.any(logs == np.inf):
        return False
    t_logs = logs[-tail:]
    diffs = np.diff(t_logs)
    scale = max(1.0, float(np.max(np.abs(t_logs))))
    signs = np.where(np.abs(diffs) <= 1e-13 * scale, 0, np.sign(diffs))
    nonzero = signs[signs != 0]
    turns = int(np.count_nonzero(np.diff(nonzero))) if nonzero.size else 0
    if turns > 1:
        raise InconclusiveError("the tail of the one-symbol series changes direction more than once over the probe")
    last = signs[-2:]
    if np.all(last >= 0):
        return False
    if np.all(last < 0):
        exponent = -(logs[-1] - logs[-2]) / math.log(a[-1] / a[-2])
        return bool(exponent > 1.0)
    raise InconclusiveError("the one-symbol series turns at the end of the probe")


def s_infinity(model: MarkovSystem, tol: float = 1e-4, probe_cutoff: int = 10**6) -> float:
    """Finiteness abscissa of ``s -> P(-s log|T'|)``; ``-inf`` for finite models."""
    if model.is_finite:
        return -math.inf
    logd = model.log_derivative_potential()

    def finite(s):
        return finiteness_test(model, Combination.of((-s, logd)), probe_cutoff)

    lo, hi = 0.0, 1.0
    if finite(lo):
        return 0.0
    while not finite(hi):
        lo, hi = hi, 2.0 * hi
        if hi > 1e6:
            raise ConvergenceError("finiteness abscissa not bracketed")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if finite(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Public entry points
# ---------------------------------------------------------------------------


def pressure(
    model: MarkovSystem,
    combo: Combination,
    spec: TruncationSpec,
    tolerances: Tolerances | None = None,
    *,
    check_finiteness: bool = True,
) -> PressureValue:
    """Truncated pressure of a combination; ``+inf`` if the full series diverges.

    With ``check_finiteness=False`` the truncated value is returned even when
    the full-alphabet pressure is infinite.
    """
    tolerances = tolerances or DEFAULT_TOLERANCES
    if check_finiteness and not finiteness_test(model, combo, tolerances.probe_cutoff):
        return PressureValue(math.inf, math.inf)
    val, _ = truncated_system(model, spec, tolerances).pressure(combo)
    return val


def bowen_dimension(model: MarkovSystem, spec: TruncationSpec, tol: float = 1e-12, tolerances: Tolerances | None = None) -> float:
    """Dimension of the truncated repeller: the root of Bowen's equation."""
    return truncated_system(model, spec, tolerances).bowen_dimension(tol)


def equilibrium_stats(
    model: MarkovSystem,
    combo: Combination,
    spec: TruncationSpec,
    tracked: Sequence[Potential] = (),
    tolerances: Tolerances | None = None,
) -> EquilibriumStats:
    """Entropy, Lyapunov exponent and tracked integrals of the equilibrium state."""
    stats, _ = truncated_system(model, spec, tolerances).equilibrium(combo, tracked)
    return stats
