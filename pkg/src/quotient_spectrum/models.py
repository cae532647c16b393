"""Countable-branch expanding Markov interval maps and their potentials.

Every model here is a full-branch map of [0, 1]: each symbol ``a`` owns a
branch interval ``I_a`` that the map sends onto the whole unit interval.
Symbols start at 1.  Infinite alphabets are handled lazily, so a model never
materializes more branches than an experiment asks for.

Three families are provided:

* :class:`GaussModel`, the continued-fraction map ``x -> 1/x mod 1``;
* :class:`MPInducedModel`, the first-return map of ``x + x**(1+beta) mod 1``
  to its right branch, coded by the return time;
* :class:`FiniteModel`, a piecewise-affine map with finitely many branches,
  usually loaded from a text file.
"""
from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.optimize import bisect

Word = tuple[int, ...]

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


class ModelError(ValueError):
    """Raised for invalid model parameters, identifiers or files."""


# ---------------------------------------------------------------------------
# Potentials
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Potential:
    """A locally Hoelder observable evaluated on cylinder words.

    Parameters
    ----------
    name:
        Identifier used as key in equilibrium statistics.
    evaluate:
        ``evaluate(word, x)`` returns the value at the point ``x`` lying in the
        cylinder of ``word``.  Only the first symbol is needed by the shipped
        potentials, but the full word is passed for generality.
    variation_bound:
        ``variation_bound(k)`` bounds the oscillation over any depth-``k``
        cylinder.
    branch_values:
        Vectorized values at the depth-one representative ``inv_a(1)`` of the
        symbols in an integer array.  Used by finiteness probes and boundary
        estimates, which need symbols far beyond any truncation.
    block_table:
        ``block_table(n, k)`` returns one value per depth-``k`` word over
        ``{1..n}``, as an array broadcastable to shape ``(n,) * k`` with axis
        ``i`` indexing symbol ``i``.  Each value is attained at some point of
        the word's cylinder.
    """

    name: str
    evaluate: Callable[[Sequence[int], float], float]
    variation_bound: Callable[[int], float]
    branch_values: Callable[[np.ndarray], np.ndarray]
    block_table: Callable[[int, int], np.ndarray]
    lower_bound: float = -math.inf
    upper_bound: float = math.inf
    eta: float = 0.0
    first_symbol: bool = False
    evaluate_many: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None

    def values_at(self, symbols: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Vectorized ``evaluate`` for points whose first symbols are given."""
        if self.evaluate_many is not None:
            return np.asarray(self.evaluate_many(np.asarray(symbols), np.asarray(points, dtype=float)), dtype=float)
        return np.array([self.evaluate((int(a),), float(x)) for a, x in zip(symbols, points)])

    def __repr__(self) -> str:
        return f"Potential({self.name!r})"


def _zero_variation(k: int) -> float:
    return 0.0


def symbol_potential(
    name: str,
    values: Callable[[np.ndarray], np.ndarray],
    *,
    lower_bound: float = -math.inf,
    upper_bound: float = math.inf,
    eta: float = 0.0,
) -> Potential:
    """A potential that depends on the first symbol only.

    ``values`` maps an integer array of symbols to a float array.  Symbols
    may be arbitrarily large naturals.
    """

    def evaluate(word, x=None):
        return float(values(np.asarray([word[0]], dtype=np.int64))[0])

    def block_table(n, k):
        vals = np.asarray(values(np.arange(1, n + 1, dtype=np.int64)), dtype=float)
        return vals.reshape((n,) + (1,) * (k - 1))

    def branch_values(a):
        return np.asarray(values(np.asarray(a, dtype=np.int64)), dtype=float)

    return Potential(
        name=name,
        evaluate=evaluate,
        variation_bound=_zero_variation,
        branch_values=branch_values,
        block_table=block_table,
        lower_bound=lower_bound,
        upper_bound=upper_bound,
        eta=eta,
        first_symbol=True,
        evaluate_many=lambda a, x: branch_values(a),
    )


def digit_potential() -> Potential:
    """``a1``, the first digit."""
    return symbol_potential("digit", lambda a: a.astype(float), lower_bound=1.0, eta=1.0)


def log_digit_potential() -> Potential:
    """``log a1``."""
    return symbol_potential("log-digit", lambda a: np.log(a.astype(float)), lower_bound=0.0)


def power_digit_potential(rho: float) -> Potential:
    """``a1 ** rho`` for a real exponent ``rho``."""
    rho = float(rho)
    if rho > 0:
        lower, upper = 1.0, math.inf
    elif rho < 0:
        lower, upper = 0.0, 1.0
    else:
        lower, upper = 1.0, 1.0
    return symbol_potential(
        f"power-digit:{rho:g}",
        lambda a: np.power(a.astype(float), rho),
        lower_bound=lower,
        upper_bound=upper,
        eta=lower if rho >= 0 else 0.0,
    )


def constant_potential(c: float, name: str | None = None) -> Potential:
    """The constant function ``c``."""
    c = float(c)
    return symbol_potential(
        name or f"const:{c:g}",
        lambda a: np.full(np.shape(a), c),
        lower_bound=c,
        upper_bound=c,
        eta=max(c, 0.0),
    )


def product_potential(f: Potential, g: Potential, name: str | None = None) -> Potential:
    """Pointwise product ``f * g`` with a composed variation bound."""

    def variation(k):
        vf, vg = f.variation_bound(k), g.variation_bound(k)
        if vf == 0.0 and vg == 0.0:
            return 0.0
        sup_f = max(abs(f.lower_bound), abs(f.upper_bound))
        sup_g = max(abs(g.lower_bound), abs(g.upper_bound))
        total = 0.0
        for var, sup in ((vf, sup_g), (vg, sup_f)):
            if var:
                total += var * sup
        return total + vf * vg

    lows = [
        f.lower_bound * g.lower_bound,
        f.lower_bound * g.upper_bound,
        f.upper_bound * g.lower_bound,
        f.upper_bound * g.upper_bound,
    ]
    lows = [v for v in lows if not math.isnan(v)]
    nonneg = f.lower_bound >= 0 and g.lower_bound >= 0
    return Potential(
        name=name or f"{f.name}*{g.name}",
        evaluate=lambda word, x: f.evaluate(word, x) * g.evaluate(word, x),
        variation_bound=variation,
        branch_values=lambda a: f.branch_values(a) * g.branch_values(a),
        block_table=lambda n, k: f.block_table(n, k) * g.block_table(n, k),
        lower_bound=min(lows) if lows else -math.inf,
        upper_bound=max(lows) if lows else math.inf,
        eta=f.eta * g.eta if nonneg else 0.0,
        first_symbol=f.first_symbol and g.first_symbol,
        evaluate_many=lambda a, x: f.values_at(a, x) * g.values_at(a, x),
    )


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------


class MarkovSystem:
    """Base class for full-branch expanding Markov interval maps.

    Subclasses provide ``inverse_branch``, ``log_derivative``,
    ``branch_interval``, ``pullback`` and ``log_derivative_potential``.
    ``branch_count`` is an int or ``math.inf``.
    """

    name = "abstract"
    branch_count: float = math.inf

    # -- interface -----------------------------------------------------
    def inverse_branch(self, a, y):
        raise NotImplementedError

    def log_derivative(self, x):
        raise NotImplementedError

    def branch_interval(self, a: int) -> tuple[float, float]:
        raise NotImplementedError

    def pullback_log_derivative(self, y: np.ndarray, n: int) -> np.ndarray:
        """``log|T'|`` at ``inv_a(y)`` for ``a = 1..n``; shape ``(n,) + y.shape``."""
        raise NotImplementedError

    def branch_log_derivative(self, a: np.ndarray) -> np.ndarray:
        """``log|T'|`` at the depth-one representatives ``inv_a(1)``."""
        raise NotImplementedError

    def log_derivative_variation(self, k: int) -> float:
        raise NotImplementedError

    # -- shared helpers --------------------------------------------------
    @property
    def is_finite(self) -> bool:
        return not math.isinf(self.branch_count)

    def check_symbol(self, a: int) -> int:
        a = int(a)
        if a < 1 or a > self.branch_count:
            raise ModelError(f"symbol {a} has no branch in model {self.name!r}")
        return a

    def compose(self, word: Sequence[int], y):
        """Image of ``y`` under ``inv_{w1} o ... o inv_{wk}``."""
        for a in reversed(word):
            y = self.inverse_branch(self.check_symbol(a), y)
        return y

    def representative(self, word: Sequence[int]) -> float:
        """Canonical representative of the cylinder: the image of 1."""
        return float(self.compose(word, 1.0))

    def periodic_points(self, words: np.ndarray, tol: float = 1e-15, max_iter: int = 500) -> np.ndarray:
        """Fixed points of ``inv_w`` for each row ``w`` of an integer array.

        The composed inverse branch is a contraction, so iterating it from 1
        converges to the unique periodic point coded by the repeated word.
        """
        words = np.atleast_2d(np.asarray(words, dtype=np.int64))
        x = np.ones(words.shape[0])
        for _ in range(max_iter):
            y = x
            for j in range(words.shape[1] - 1, -1, -1):
                y = self.inverse_branch(words[:, j], y)
            done = np.max(np.abs(y - x)) <= tol
            x = y
            if done:
                break
        return x

    def periodic_point(self, word: Sequence[int]) -> float:
        return float(self.periodic_points(np.asarray([list(word)]))[0])

    def tail_points(self, n: int, k: int, anchor: float) -> np.ndarray:
        """Images of ``anchor`` under all composed inverse branches of length ``k - 1``.

        Entry ``[a2, ..., ak]`` is ``inv_{a2} o ... o inv_{ak} (anchor)``.
        """
        y = np.full((), float(anchor))
        for _ in range(k - 1):
            y = self.inverse_branch(np.arange(1, n + 1).reshape((n,) + (1,) * y.ndim), y[None, ...])
        return y

    def block_log_derivative(self, n: int, k: int) -> np.ndarray:
        """Table of ``log|T'|`` on all depth-k cylinders over ``{1..n}``.

        Entry ``w`` is ``log |I(w2..wk)| - log |I(w)|``.  By the mean value
        theorem this is ``log|T'|`` at some point of the cylinder ``I(w)``, so
        it is within ``var_k`` of the value at any representative, and the
        product of these factors along a word telescopes to the cylinder
        length up to a bounded boundary term.
        """
        lo = self.tail_points(n, k, 0.0)
        hi = self.tail_points(n, k, 1.0)
        a = np.arange(1, n + 1).reshape((n,) + (1,) * (k - 1))
        x0 = self.inverse_branch(a, lo[None, ...])
        x1 = self.inverse_branch(a, hi[None, ...])
        return np.log(np.abs(hi - lo))[None, ...] - np.log(np.abs(x1 - x0))

    def log_derivative_at(self, symbols: np.ndarray, points: np.ndarray) -> np.ndarray:
        """``log|T'|`` at points whose symbols are known, vectorized."""
        return np.asarray(self.log_derivative(np.asarray(points, dtype=float)), dtype=float)

    def log_derivative_potential(self) -> Potential:
        return Potential(
            name="log-derivative",
            evaluate=lambda word, x: float(self.log_derivative(x)),
            evaluate_many=self.log_derivative_at,
            variation_bound=self.log_derivative_variation,
            branch_values=self.branch_log_derivative,
            block_table=self.block_log_derivative,
            lower_bound=0.0,
        )


class GaussModel(MarkovSystem):
    """The Gauss map ``x -> 1/x - floor(1/x)``; branch ``a`` is ``[1/(a+1), 1/a]``."""

    name = "gauss"
    branch_count = math.inf

    def inverse_branch(self, a, y):
        return 1.0 / (np.asarray(a, dtype=float) + y) if np.ndim(a) or np.ndim(y) else 1.0 / (a + y)

    def log_derivative(self, x):
        return -2.0 * np.log(x)

    def branch_interval(self, a):
        a = self.check_symbol(a)
        return 1.0 / (a + 1.0), 1.0 / a

    def pullback_log_derivative(self, y, n):
        a = np.arange(1, n + 1, dtype=float).reshape((n,) + (1,) * np.ndim(y))
        out = a + y
        np.log(out, out=out)
        out *= 2.0
        return out

    def block_log_derivative(self, n, k):
        # At the endpoints 1/(a1 + y) the value is 2 log(a1 + y); the average
        # log(a1 + y0) + log(a1 + y1) equals -log of the ratio of cylinder
        # lengths |I(a1..ak)| / |I(a2..ak)|.
        a = np.arange(1, n + 1, dtype=float).reshape((n,) + (1,) * (k - 1))
        out = a + self.tail_points(n, k, 0.0)[None, ...] if k > 1 else a + 0.0
        np.log(out, out=out)
        tmp = a + self.tail_points(n, k, 1.0)[None, ...] if k > 1 else a + 1.0
        np.log(tmp, out=tmp)
        out += tmp
        return out

    def branch_log_derivative(self, a):
        return 2.0 * np.log(np.asarray(a, dtype=float) + 1.0)

    def log_derivative_variation(self, k):
        # Over a depth-k cylinder with endpoints p/q and (p+p')/(q+q') the
        # oscillation of -2 log x is 2 log(1 + 1/(q (p + p'))) <= 2/(F_k F_{k+1}).
        if k < 1:
            raise ValueError("depth must be >= 1")
        if k == 1:
            return 2.0 * math.log(2.0)
        f0, f1 = 1, 1
        for _ in range(k - 1):
            f0, f1 = f1, f0 + f1
        return 2.0 / (f0 * f1)


class FiniteModel(MarkovSystem):
    """Piecewise-affine full-branch map with finitely many branches.

    Branch ``a`` is the interval ``[left[a-1], right[a-1]]`` and its inverse
    branch is the increasing affine map of ``[0, 1]`` onto it.  ``tables``
    holds one-step potential values, one entry per symbol.
    """

    def __init__(self, intervals: Sequence[tuple[float, float]], tables: Mapping[str, Sequence[float]] | None = None, name: str = "finite"):
        iv = np.asarray(intervals, dtype=float)
        if iv.ndim != 2 or iv.shape[1] != 2 or iv.shape[0] < 1:
            raise ModelError("intervals must be a non-empty list of (left, right) pairs")
        left, right = iv[:, 0], iv[:, 1]
        if np.any(left < 0) or np.any(right > 1) or np.any(right <= left):
            raise ModelError("branch intervals must satisfy 0 <= left < right <= 1")
        if np.any(right - left >= 1.0):
            raise ModelError("every branch must be strictly shorter than [0, 1] (uniform expansion)")
        order = np.argsort(left)
        if not (np.array_equal(order, np.arange(len(left))) or np.array_equal(order, np.arange(len(left))[::-1])):
            raise ModelError("branch intervals must be listed in monotone order")
        srt = iv[order]
        if np.any(srt[1:, 0] < srt[:-1, 1] - 1e-15):
            raise ModelError("branch intervals must have disjoint interiors")
        self.name = name
        self.left = left
        self.right = right
        self.lengths = right - left
        self.branch_count = len(left)
        self.tables = {}
        for key, vals in (tables or {}).items():
            vals = np.asarray(vals, dtype=float)
            if vals.shape != (self.branch_count,):
                raise ModelError(f"potential {key!r} needs one value per branch")
            self.tables[key] = vals

    def _index(self, a):
        idx = np.asarray(a, dtype=np.int64) - 1
        if np.any(idx < 0) or np.any(idx >= self.branch_count):
            raise ModelError(f"symbol out of range 1..{self.branch_count}")
        return idx

    def inverse_branch(self, a, y):
        idx = self._index(a)
        return self.left[idx] + self.lengths[idx] * y

    def branch_of(self, x: float) -> int:
        inside = np.nonzero((self.left <= x) & (x <= self.right))[0]
        if inside.size == 0:
            raise ModelError(f"point {x} lies in no branch")
        return int(inside[0]) + 1

    def log_derivative(self, x):
        if np.ndim(x):
            return np.array([self.log_derivative(float(v)) for v in np.ravel(x)]).reshape(np.shape(x))
        return -math.log(self.lengths[self.branch_of(float(x)) - 1])

    def branch_interval(self, a):
        i = self._index(a)
        return float(self.left[i]), float(self.right[i])

    def pullback_log_derivative(self, y, n):
        if n > self.branch_count:
            raise ModelError(f"truncation {n} exceeds the {self.branch_count} branches of {self.name!r}")
        vals = -np.log(self.lengths[:n])
        return np.broadcast_to(vals.reshape((n,) + (1,) * np.ndim(y)), (n,) + np.shape(y)).copy()

    def block_log_derivative(self, n, k):
        if n > self.branch_count:
            raise ModelError(f"truncation {n} exceeds the {self.branch_count} branches of {self.name!r}")
        return (-np.log(self.lengths[:n])).reshape((n,) + (1,) * (k - 1))

    def branch_log_derivative(self, a):
        return -np.log(self.lengths[self._index(a)])

    def log_derivative_variation(self, k):
        return 0.0

    def log_derivative_potential(self):
        vals = -np.log(self.lengths)
        p = symbol_potential("log-derivative", lambda a: vals[self._index(a)], lower_bound=float(vals.min()), eta=float(vals.min()))
        return p

    def table_potential(self, key: str) -> Potential:
        vals = self.tables[key]
        return symbol_potential(
            key,
            lambda a: vals[self._index(a)],
            lower_bound=float(vals.min()),
            upper_bound=float(vals.max()),
            eta=max(float(vals.min()), 0.0),
        )


class MPInducedModel(MarkovSystem):
    """First-return map of ``F(x) = x + x**(1+beta) mod 1`` to ``[t, 1]``.

    Writing ``t`` for the root of ``t + t**(1+beta) = 1``, the return-time
    partition is ``I_a = [t_a, t_{a-1}]`` with ``t_0 = 1`` and ``t_a`` the
    preimage of ``t_{a-1}`` under the left branch of ``F``.  Symbol ``a`` is the
    return time, so the inverse branch is ``g0^(a-1) o g1`` with ``g0`` and
    ``g1`` the inverses of the left and right branches of ``F``.

    ``observable`` is the function ``f`` whose sums along return orbits form
    the induced potential.  The orbit ``t_0, t_1, ...`` and the running sums
    along it are cached lazily.
    """

    def __init__(self, beta: float, branch_cutoff: int | None = None, observable: Callable[[np.ndarray], np.ndarray] | None = None):
        beta = float(beta)
        if not 0.0 < beta < 1.0:
            raise ModelError("beta must lie in (0, 1)")
        if branch_cutoff is not None and int(branch_cutoff) < 1:
            raise ModelError("branch_cutoff must be >= 1")
        self.beta = beta
        self.branch_count = math.inf if branch_cutoff is None else int(branch_cutoff)
        self.name = f"mp:{beta:g}"
        self.observable = observable if observable is not None else default_mp_observable
        self.t = bisect(lambda s: s + s ** (1.0 + beta) - 1.0, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        self._lock = threading.Lock()
        self._orbit = np.array([1.0])
        self._logd_cum = None
        self._obs_cum = None

    # -- the underlying interval map -------------------------------------
    def forward(self, x):
        y = x + x ** (1.0 + self.beta)
        return y - 1.0 if y >= 1.0 else y

    def dF(self, x):
        return 1.0 + (1.0 + self.beta) * np.power(x, self.beta)

    def g0(self, y):
        """Inverse of the left branch ``x + x**(1+beta)``, vectorized."""
        b = self.beta
        y = np.asarray(y, dtype=float)
        x = y / (1.0 + np.power(y, b))
        for _ in range(60):
            xb = np.power(x, b)
            step = (x + x * xb - y) / (1.0 + (1.0 + b) * xb)
            x = x - step
            if np.all(np.abs(step) <= 1e-16 * np.maximum(x, 1e-300)):
                break
        return x

    def g1(self, y):
        """Inverse of the right branch ``x + x**(1+beta) - 1``, vectorized."""
        b = self.beta
        y = np.asarray(y, dtype=float)
        x = self.t + (1.0 - self.t) * y
        for _ in range(60):
            xb = np.power(x, b)
            step = (x + x * xb - 1.0 - y) / (1.0 + (1.0 + b) * xb)
            x = x - step
            if np.all(np.abs(step) <= 1e-16):
                break
        return np.clip(x, self.t, 1.0)

    def _g0_scalar(self, y: float) -> float:
        b = self.beta
        if y < 0.01:
            yb = y ** b
            x = y * (1.0 - yb + (1.0 + b) * yb * yb)
        else:
            x = y / (1.0 + y ** b)
        for _ in range(60):
            xb = x ** b
            step = (x + x * xb - y) / (1.0 + (1.0 + b) * xb)
            x -= step
            if abs(step) <= 2e-16 * x:
                break
        return x

    # -- lazily cached orbit t_0, t_1, ... -----------------------------------
    def orbit(self, m: int) -> np.ndarray:
        """The points ``t_0 = 1 > t_1 = t > ... > t_m``."""
        m = int(m)
        with self._lock:
            cur = self._orbit
            if len(cur) <= m:
                new = np.empty(max(m + 1, 2 * len(cur)))
                new[: len(cur)] = cur
                y = cur[-1]
                g0 = self._g0_scalar
                for j in range(len(cur), len(new)):
                    y = g0(y) if j > 1 else self.t
                    new[j] = y
                self._orbit = new
                self._logd_cum = None
                self._obs_cum = None
            return self._orbit[: m + 1]

    def _cumulative(self, m: int):
        self.orbit(m)
        with self._lock:
            if self._logd_cum is None or len(self._logd_cum) < m + 1:
                pts = self._orbit
                self._logd_cum = np.cumsum(np.log(self.dF(pts)))
                self._obs_cum = np.cumsum(np.asarray(self.observable(pts), dtype=float))
            return self._logd_cum, self._obs_cum

    def _check_symbols(self, a):
        a = np.asarray(a, dtype=np.int64)
        if np.any(a < 1) or np.any(a > self.branch_count):
            raise ModelError(f"symbol out of range for {self.name!r}")
        return a

    def inverse_branch(self, a, y):
        a = self._check_symbols(a)
        scalar = a.ndim == 0 and np.ndim(y) == 0
        a, y = np.broadcast_arrays(a, np.asarray(y, dtype=float))
        x = np.array(self.g1(y), dtype=float)
        remaining = a - 1
        while np.any(remaining > 0):
            mask = remaining > 0
            x[mask] = self.g0(x[mask])
            remaining = remaining - mask
        return float(x) if scalar else x

    def branch_interval(self, a):
        a = self.check_symbol(a)
        pts = self.orbit(a)
        return float(pts[a]), float(pts[a - 1])

    def return_time(self, x: float) -> int:
        """First return time of ``x`` to ``[t, 1]`` (the symbol of ``x``)."""
        if x >= self.t:
            return 1
        if x <= 0:
            raise ModelError("0 never returns")
        m = 64
        while self.orbit(m)[-1] > x:
            m *= 2
        pts = self.orbit(m)
        # pts is decreasing; x lies in [t_a, t_{a-1})
        a = int(np.searchsorted(-pts, -x, side="right"))
        return max(a, 1)

    def return_orbit(self, a: int, x: float) -> np.ndarray:
        """``x, F x, ..., F^(a-1) x`` for ``x`` in branch ``a`` (no reduction mod 1)."""
        out = np.empty(a)
        b1 = 1.0 + self.beta
        for i in range(a):
            out[i] = x
            x = x + x**b1
        return out

    def log_derivative(self, x):
        if np.ndim(x):
            return np.array([self.log_derivative(float(v)) for v in np.ravel(x)]).reshape(np.shape(x))
        a = self.return_time(float(x))
        return float(np.sum(np.log(self.dF(self.return_orbit(a, float(x))))))

    def _walk(self, y, n):
        """Yield ``inv_a(y)`` for ``a = 1..n`` by repeated application of ``g0``."""
        if n > self.branch_count:
            raise ModelError(f"truncation {n} exceeds the {self.branch_count} branches of {self.name!r}")
        x = self.g1(np.asarray(y, dtype=float))
        yield x
        for _ in range(1, n):
            x = self.g0(x)
            yield x

    def _secant_slope(self, x0, x1):
        """Mean of ``F'`` over ``[x0, x1]``, accurate even when ``x1 - x0`` is tiny.

        ``(x1**(1+b) - x0**(1+b)) / (x1 - x0) = lo**b * q(u)`` with
        ``u = (hi - lo) / lo`` and ``q(u) = expm1((1+b) log1p(u)) / u``.
        """
        b1 = 1.0 + self.beta
        lo = np.minimum(x0, x1)
        u = np.abs(x1 - x0) / lo
        small = u < 1e-8
        safe = np.where(small, 1.0, u)
        q = np.where(small, b1 * (1.0 + 0.5 * self.beta * u), np.expm1(b1 * np.log1p(safe)) / safe)
        return 1.0 + np.power(lo, self.beta) * q

    def _pullback(self, y, n, with_observable: bool):
        """Point values ``log|T'|`` (and induced sums) at ``inv_a(y)``, ``a = 1..n``."""
        y = np.asarray(y, dtype=float)
        logd = np.empty((n,) + y.shape)
        obs = np.empty((n,) + y.shape) if with_observable else None
        acc = 0.0
        acc_obs = 0.0
        for i, x in enumerate(self._walk(y, n)):
            acc = acc + np.log(self.dF(x))
            logd[i] = acc
            if with_observable:
                acc_obs = acc_obs + self.observable(x)
                obs[i] = acc_obs
        return logd, obs

    def pullback_log_derivative(self, y, n):
        return self._pullback(y, n, False)[0]

    def tail_points(self, n, k, anchor):
        y = np.full((), float(anchor))
        for _ in range(k - 1):
            out = np.empty((n,) + y.shape)
            for i, x in enumerate(self._walk(y, n)):
                out[i] = x
            y = out
        return y

    def block_log_derivative(self, n, k):
        """Mean-value table ``log|I(w2..wk)| - log|I(w)|``.

        Along the return orbit the cylinder is pushed through ``F`` one step
        at a time, and the log of each secant slope is accumulated, which
        avoids subtracting nearly equal endpoints.
        """
        lo = self.tail_points(n, k, 0.0)
        hi = self.tail_points(n, k, 1.0)
        out = np.empty((n,) + lo.shape)
        acc = np.zeros(lo.shape)
        for i, (x0, x1) in enumerate(zip(self._walk(lo, n), self._walk(hi, n))):
            acc = acc + np.log(self._secant_slope(x0, x1))
            out[i] = acc
        return out

    def block_observable_sum(self, n, k):
        """Induced observable on depth-k cylinders, averaged over the two endpoints."""
        out = self._pullback(self.tail_points(n, k, 0.0), n, True)[1]
        out += self._pullback(self.tail_points(n, k, 1.0), n, True)[1]
        out *= 0.5
        return out

    def branch_log_derivative(self, a):
        a = self._check_symbols(a)
        cum, _ = self._cumulative(int(np.max(a)))
        return cum[a - 1]

    def branch_observable_sum(self, a):
        a = self._check_symbols(a)
        _, cum = self._cumulative(int(np.max(a)))
        return cum[a - 1]

    def observable_sum(self, word, x) -> float:
        a = int(word[0])
        return float(np.sum(self.observable(self.return_orbit(a, float(x)))))

    def log_derivative_at(self, symbols, points):
        return self.orbit_sums(symbols, points)[0]

    def orbit_sums(self, symbols: np.ndarray, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Sums of ``log F'`` and ``f`` over ``a`` forward steps from each point, vectorized."""
        a = np.asarray(symbols, dtype=np.int64)
        x = np.array(points, dtype=float)
        logd = np.zeros(x.shape)
        obs = np.zeros(x.shape)
        b1 = 1.0 + self.beta
        for i in range(int(a.max()) if a.size else 0):
            live = a > i
            xi = x[live]
            logd[live] += np.log(self.dF(xi))
            obs[live] += self.observable(xi)
            x[live] = xi + xi**b1
        return logd, obs

    # -- empirical variation bounds --------------------------------------
    def _empirical_variation(self, which: int, k: int) -> float:
        """Largest oscillation of a return-orbit sum seen on sampled depth-k cylinders.

        ``which`` selects the log-derivative sum (0) or the observable sum (1)
        from :meth:`orbit_sums`.
        """
        rng = np.random.default_rng(12345 + k)
        small = [1, 2, 3, 4, 6, 10]
        if k == 1:
            words = [(a,) for a in [1, 2, 3, 4, 6, 10, 20, 50, 100, 200, 400]]
        else:
            pool = list(itertools.product(small, repeat=k)) if len(small) ** k <= 400 else None
            if pool is None:
                pool = [tuple(int(s) for s in rng.choice(small, size=k)) for _ in range(400)]
                pool += [(1,) * k, (2,) + (1,) * (k - 1)]
            words = pool
        w = np.asarray(words, dtype=np.int64)
        lo = np.zeros(len(w))
        hi = np.ones(len(w))
        for j in range(k - 1, -1, -1):
            lo = np.asarray(self.inverse_branch(w[:, j], lo), dtype=float)
            hi = np.asarray(self.inverse_branch(w[:, j], hi), dtype=float)
        a, b = np.minimum(lo, hi), np.maximum(lo, hi)
        frac = np.linspace(0.0, 1.0, 5)
        frac[0] = 1e-15
        pts = a[:, None] + frac[None, :] * (b - a)[:, None]
        sym = np.repeat(w[:, 0], len(frac))
        vals = self.orbit_sums(sym, pts.ravel())[which].reshape(pts.shape)
        return float(np.max(vals.max(axis=1) - vals.min(axis=1)))

    def _variation_table(self, which: int, k: int) -> float:
        cache = self.__dict__.setdefault("_var_cache", {})
        if (which, k) not in cache:
            prev = self._variation_table(which, k - 1) if k > 1 else math.inf
            est = 1.25 * self._empirical_variation(which, k)
            cache[(which, k)] = min(prev, est)
        return cache[(which, k)]

    def log_derivative_variation(self, k):
        if k < 1:
            raise ValueError("depth must be >= 1")
        return self._variation_table(0, min(k, 12)) * (0.5 ** max(k - 12, 0))

    def observable_variation(self, k):
        if k < 1:
            raise ValueError("depth must be >= 1")
        return self._variation_table(1, min(k, 12)) * (0.5 ** max(k - 12, 0))

    def return_time_potential(self) -> Potential:
        return symbol_potential("return-time", lambda a: a.astype(float), lower_bound=1.0, eta=1.0)

    def observable_potential(self) -> Potential:
        # f >= 0 on [0, t] keeps the induced sums bounded below by the worst
        # single visit to [t, 1]; otherwise the class-R lower bound is lost.
        grid_left = np.linspace(0.0, self.t, 2001)
        grid_right = np.linspace(self.t, 1.0, 2001)
        if np.min(self.observable(grid_left)) < 0:
            lower = -math.inf
        else:
            lower = min(0.0, float(np.min(self.observable(grid_right))))
        return Potential(
            name="mp-sum",
            evaluate=self.observable_sum,
            evaluate_many=lambda a, x: self.orbit_sums(a, x)[1],
            variation_bound=self.observable_variation,
            branch_values=self.branch_observable_sum,
            block_table=self.block_observable_sum,
            lower_bound=lower,
        )


MP_OBSERVABLE_C = 0.8


def default_mp_observable(x):
    """The shipped observable ``f(x) = x (0.8 - x)``.

    It vanishes at the indifferent fixed point 0, is positive on ``(0, 0.8)``
    and negative near 1.  The fixed point 1 of the induced map has average
    ``-0.2``, while the absolutely continuous measure gives a positive
    average, so induced ratios of both signs occur.
    """
    x = np.asarray(x, dtype=float)
    return x * (MP_OBSERVABLE_C - x)


def build_gauss() -> GaussModel:
    return GaussModel()


def build_mp_induced(beta: float, branch_cutoff: int | None = None, observable=None) -> MPInducedModel:
    return MPInducedModel(beta, branch_cutoff, observable)


def build_finite(intervals, tables=None, name="finite") -> FiniteModel:
    return FiniteModel(intervals, tables, name)


def load_finite(path: str | Path) -> FiniteModel:
    """Load a finite model from a whitespace-separated text file.

    One line per symbol: left endpoint, right endpoint, then one value per
    potential column.  Blank lines and ``#`` comments are skipped.  A leading
    comment of the form ``# columns: name1 name2 ...`` names the potential
    columns; otherwise they are called ``v1, v2, ...``.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ModelError(f"cannot read finite model file {path}: {exc}") from exc
    names = None
    rows = []
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("#"):
            body = line[1:].strip()
            if body.lower().startswith("columns:"):
                names = body.split(":", 1)[1].split()
            continue
        if not line:
            continue
        try:
            rows.append([float(tok) for tok in line.split()])
        except ValueError as exc:
            raise ModelError(f"malformed line in {path}: {raw!r}") from exc
    if not rows:
        raise ModelError(f"{path} lists no branches")
    width = {len(r) for r in rows}
    if len(width) != 1 or min(width) < 2:
        raise ModelError(f"{path}: every line needs the same number (>= 2) of fields")
    data = np.asarray(rows)
    ncol = data.shape[1] - 2
    if names is None:
        names = [f"v{i + 1}" for i in range(ncol)]
    if len(names) != ncol:
        raise ModelError(f"{path}: {len(names)} column names for {ncol} columns")
    tables = {nm: data[:, 2 + i] for i, nm in enumerate(names)}
    return FiniteModel(data[:, :2], tables, name=f"finite:{path.name}")


def load_model(identifier: str, **kwargs) -> MarkovSystem:
    """Build a model from ``"gauss"``, ``"mp:<beta>"`` or ``"finite:<file>"``."""
    ident = identifier.strip()
    if ident == "gauss":
        return build_gauss()
    if ident.startswith("mp:"):
        try:
            beta = float(ident[3:])
        except ValueError as exc:
            raise ModelError(f"bad beta in {identifier!r}") from exc
        return build_mp_induced(beta, **kwargs)
    if ident.startswith("finite:"):
        return load_finite(ident[len("finite:"):])
    raise ModelError(f"unknown model identifier {identifier!r}")


def standard_potentials(model: MarkovSystem, *, rho: float = 0.5) -> dict[str, Potential]:
    """Named potentials shipped with each model family."""
    if isinstance(model, GaussModel):
        pots = [digit_potential(), log_digit_potential(), power_digit_potential(rho), model.log_derivative_potential()]
        out = {p.name: p for p in pots}
        out["power-digit"] = out[f"power-digit:{float(rho):g}"]
        return out
    if isinstance(model, MPInducedModel):
        pots = [model.return_time_potential(), model.observable_potential(), model.log_derivative_potential()]
        return {p.name: p for p in pots}
    if isinstance(model, FiniteModel):
        out = {key: model.table_potential(key) for key in model.tables}
        out["log-derivative"] = model.log_derivative_potential()
        return out
    raise ModelError(f"no standard potentials for model {getattr(model, 'name', model)!r}")


def resolve_potential(model: MarkovSystem, identifier: str) -> Potential:
    """Look up a potential by name; accepts ``power-digit:<rho>`` and ``const:<c>``."""
    ident = identifier.strip()
    if ident.startswith("power-digit:"):
        if not isinstance(model, GaussModel):
            raise ModelError("power-digit potentials are defined for the Gauss model")
        return power_digit_potential(float(ident.split(":", 1)[1]))
    if ident.startswith("const:"):
        return constant_potential(float(ident.split(":", 1)[1]))
    pots = standard_potentials(model)
    if ident not in pots:
        raise ModelError(f"unknown potential {identifier!r} for model {model.name!r}; known: {sorted(pots)}")
    return pots[ident]
