"""Brute-force reference computations used only by the tests.

Nothing here touches the transfer-matrix code.  The reference values come
from periodic-orbit sums, direct optimization over block measures, exact
rational continued-fraction arithmetic and forward iteration of the
intermittent map.  They are slow and exist to validate the library.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp

ORACLE_BUDGET = 10**7
ORACLE_SEED = 20240611


class OracleInfeasible(ValueError):
    """No block measure of the requested period meets the ratio constraint."""


# ---------------------------------------------------------------------------
# periodic-orbit pressure
# ---------------------------------------------------------------------------


def all_words(n: int, m: int) -> np.ndarray:
    if n**m > ORACLE_BUDGET:
        raise ValueError(f"{n}^{m} periodic words exceed the oracle budget")
    return np.array(list(itertools.product(range(1, n + 1), repeat=m)), dtype=np.int64)


def periodic_orbits(model, words: np.ndarray, sweeps: int = 200) -> np.ndarray:
    """Points of the periodic orbit coded by each row, one column per shift.

    The fixed point of the composed inverse branch is found by plain
    iteration from 1/2; the shifts are then obtained by applying the inverse
    branches of the rotated word.
    """
    m = words.shape[1]
    x = np.full(words.shape[0], 0.5)
    for _ in range(sweeps):
        y = x
        for j in range(m - 1, -1, -1):
            y = np.asarray(model.inverse_branch(words[:, j], y), dtype=float)
        if np.max(np.abs(y - x)) == 0.0:
            x = y
            break
        x = y
    orbit = np.empty(words.shape, dtype=float)
    orbit[:, 0] = x
    # x_j = inv_{w_j} o ... o inv_{w_{m-1}} (x_0), so walk the word backwards
    y = x
    for j in range(m - 1, 0, -1):
        y = np.asarray(model.inverse_branch(words[:, j], y), dtype=float)
        orbit[:, j] = y
    return orbit


def orbit_sums(model, pairs, words: np.ndarray) -> np.ndarray:
    """Birkhoff sum of ``sum_i c_i p_i`` along each periodic orbit."""
    if all(p.first_symbol for _, p in pairs):
        total = np.zeros(words.shape[0])
        for c, p in pairs:
            vals = p.branch_values(np.arange(1, int(words.max()) + 1))
            total += c * vals[words - 1].sum(axis=1)
        return total
    orbit = periodic_orbits(model, words)
    total = np.zeros(words.shape[0])
    for j in range(words.shape[1]):
        for c, p in pairs:
            total += c * p.values_at(words[:, j], orbit[:, j])
    return total


def oracle_pressure(model, pairs, n: int, m: int) -> float:
    """``(1/m) log`` of the weighted sum over all period-m orbits of the n-symbol subsystem."""
    pairs = list(pairs)
    if all(p.first_symbol for _, p in pairs):
        if n**m > ORACLE_BUDGET:
            raise ValueError(f"{n}^{m} periodic words exceed the oracle budget")
        one = np.zeros(n)
        for c, p in pairs:
            one += c * p.branch_values(np.arange(1, n + 1))
        # enumerate every word through repeated outer sums
        s = np.zeros(1)
        for _ in range(m):
            s = np.add.outer(s, one).ravel()
        return float(logsumexp(s)) / m
    words = all_words(n, m)
    return float(logsumexp(orbit_sums(model, pairs, words))) / m


def richardson(ms: Sequence[int], values: Sequence[float]) -> float:
    """Extrapolate ``P_m = P + c1/m + c2/m^2 + ...`` to ``m = infinity``."""
    ms = np.asarray(ms, dtype=float)
    a = np.vander(1.0 / ms, len(ms), increasing=True)
    return float(np.linalg.solve(a, np.asarray(values, dtype=float))[0])


# ---------------------------------------------------------------------------
# spectrum lower bound via block measures
# ---------------------------------------------------------------------------


def _entropy(p: np.ndarray) -> float:
    q = p[p > 0]
    return float(-(q * np.log(q)).sum())


def oracle_spectrum(model, phi, psi, alpha: float, n: int, m: int, starts: int = 20, seed: int = ORACLE_SEED) -> float:
    """Best ``h/lambda`` over Bernoulli measures on blocks of length ``m`` with ratio ``alpha``.

    Requires one-step potentials and a model whose derivative is constant
    on branches, so that block integrals are exact.  The block measure is
    not shift invariant, but its average over the ``m`` shifts is, and
    entropy, Lyapunov exponent and integrals per symbol are unchanged.
    """
    if m > 4:
        raise ValueError("oracle_spectrum is limited to m <= 4")
    words = all_words(n, m)
    sym = np.arange(1, n + 1)
    lyap = model.branch_log_derivative(sym)[words - 1].sum(axis=1)
    d = (phi.branch_values(sym) - alpha * psi.branch_values(sym))[words - 1].sum(axis=1)
    if d.min() > 0 or d.max() < 0:
        raise OracleInfeasible(f"no period-{m} block reaches ratio {alpha}")
    size = len(words)

    def objective(p):
        p = np.clip(p, 0.0, None)
        return -_entropy(p) / float(p @ lyap)

    cons = [
        {"type": "eq", "fun": lambda p: p.sum() - 1.0, "jac": lambda p: np.ones_like(p)},
        {"type": "eq", "fun": lambda p: p @ d, "jac": lambda p: d},
    ]
    rng = np.random.default_rng(seed)
    best = -math.inf
    # feasible vertex mixtures: the best pure block on each side of the constraint
    pos, neg = np.flatnonzero(d >= 0), np.flatnonzero(d <= 0)
    for s in range(starts):
        p0 = rng.dirichlet(np.ones(size))
        i, j = rng.choice(pos), rng.choice(neg)
        # shift mass to satisfy the constraint approximately
        if d[i] != d[j]:
            lam = -d[j] / (d[i] - d[j])
            p0 = 0.5 * p0
            p0[i] += 0.5 * lam
            p0[j] += 0.5 * (1 - lam)
        res = minimize(objective, p0, method="SLSQP", bounds=[(0.0, 1.0)] * size, constraints=cons, options={"maxiter": 500, "ftol": 1e-14})
        p = np.clip(res.x, 0.0, None)
        p /= p.sum()
        if abs(p @ d) > 1e-9 * max(1.0, np.abs(d).max()):
            continue
        best = max(best, -objective(p))
    if best == -math.inf:
        # a pure fixed point with exact ratio has entropy 0
        if np.any(d == 0):
            return 0.0
        raise OracleInfeasible("optimizer found no feasible block measure")
    return best


def bernoulli_spectrum(alpha: float, lyap: Sequence[float]) -> float:
    """Closed form for two symbols with ``phi = (0, 1)``, ``psi = 1``.

    The frequency of symbol 2 is pinned to ``alpha``; entropy is maximal for
    the Bernoulli measure with that frequency and the Lyapunov exponent is
    fixed by the frequency alone.
    """
    a = float(alpha)
    h = -(a * math.log(a) + (1 - a) * math.log(1 - a))
    return h / ((1 - a) * lyap[0] + a * lyap[1])


# ---------------------------------------------------------------------------
# exact continued fractions
# ---------------------------------------------------------------------------


def convergent_interval(word: Sequence[int]) -> tuple[Fraction, Fraction]:
    """Endpoints of the continued-fraction cylinder ``[0; a1, ..., ak]``.

    They are ``p_k/q_k`` and ``(p_k + p_{k-1})/(q_k + q_{k-1})``, from the
    usual convergent recursion.
    """
    p_prev, p = Fraction(1), Fraction(0)
    q_prev, q = Fraction(0), Fraction(1)
    for a in word:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
    ends = sorted((p / q, (p + p_prev) / (q + q_prev)))
    return ends[0], ends[1]


def continued_fraction(x: Fraction, depth: int) -> list[int]:
    out = []
    for _ in range(depth):
        if x == 0:
            break
        inv = 1 / x
        a = math.floor(inv)
        out.append(a)
        x = inv - a
    return out


# ---------------------------------------------------------------------------
# intermittent map by forward iteration
# ---------------------------------------------------------------------------


def mp_return_steps(x: np.ndarray, beta: float, cap: int) -> np.ndarray:
    """Steps until ``x -> x + x**(1+beta)`` (no reduction) first reaches 1, capped."""
    x = np.array(x, dtype=float)
    steps = np.full(x.shape, cap + 1)
    live = np.ones(x.shape, dtype=bool)
    for j in range(1, cap + 1):
        idx = np.flatnonzero(live)
        if idx.size == 0:
            break
        y = x[idx] + x[idx] ** (1.0 + beta)
        hit = y >= 1.0
        steps[idx[hit]] = j
        live[idx[hit]] = False
        x[idx] = y
    return steps


def mp_branch_endpoints(beta: float, symbols: np.ndarray, iterations: int = 60) -> np.ndarray:
    """Left endpoint of each return-time branch by bisection on the step count."""
    symbols = np.asarray(symbols)
    lo = np.zeros(symbols.shape)
    hi = np.ones(symbols.shape)
    cap = int(symbols.max()) + 1
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        ok = mp_return_steps(mid, beta, cap) <= symbols
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
    return hi


def mp_induced_ratio(beta: float, c: float, bins: int = 32000, per: int = 20) -> float:
    """Ratio of the observable sum to the return time under the induced a.c. measure.

    Ulam's method on the induced map: sample each bin, push samples forward
    until they return, and take the stationary vector of the bin-to-bin
    transition matrix.
    """
    import scipy.sparse as sp

    edges = np.linspace(0.0, 1.0, bins + 1)
    u = (np.arange(per) + 0.5) / per
    x = (edges[:-1, None] + u[None, :] / bins).ravel()
    sums = np.zeros(x.size)
    steps = np.zeros(x.size)
    live = np.ones(x.size, dtype=bool)
    while live.any():
        idx = np.flatnonzero(live)
        xi = x[idx]
        sums[idx] += xi * (c - xi)
        steps[idx] += 1
        y = xi + xi ** (1.0 + beta)
        wrapped = y >= 1.0
        x[idx] = np.where(wrapped, y - 1.0, y)
        live[idx[wrapped]] = False
    rows = np.repeat(np.arange(bins), per)
    cols = np.minimum((x * bins).astype(int), bins - 1)
    trans = sp.csr_matrix((np.full(x.size, 1.0 / per), (rows, cols)), shape=(bins, bins)).T.tocsr()
    p = np.full(bins, 1.0 / bins)
    for _ in range(10000):
        q = trans @ p
        q /= q.sum()
        if np.abs(q - p).sum() < 1e-14:
            p = q
            break
        p = q
    s_bin = sums.reshape(bins, per).mean(axis=1)
    n_bin = steps.reshape(bins, per).mean(axis=1)
    return float(p @ s_bin) / float(p @ n_bin)
