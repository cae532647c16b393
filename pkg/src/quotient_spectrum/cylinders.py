"""Cylinder words, truncation parameters, lengths and Birkhoff sums."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

from .models import MarkovSystem, ModelError, Potential, Word

DEFAULT_BUDGET = 10**7


class BudgetExceeded(RuntimeError):
    """Raised when a computation would touch more words than allowed."""


@dataclass(frozen=True)
class TruncationSpec:
    """Finite sub-system: alphabet ``{1..n}`` and cylinder depth ``k``."""

    n: int
    k: int
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"alphabet cutoff must be a natural >= 1, got {self.n!r}")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"depth must be a natural >= 1, got {self.k!r}")
        if self.budget < 1:
            raise ValueError("budget must be positive")

    @property
    def word_count(self) -> int:
        return self.n**self.k

    def check_budget(self) -> None:
        if self.word_count > self.budget:
            raise BudgetExceeded(
                f"{self.n}^{self.k} = {self.word_count} depth-{self.k} words exceed the budget of {self.budget}"
            )

    def with_n(self, n: int) -> "TruncationSpec":
        return TruncationSpec(n, self.k, self.budget)


def validate_word(model: MarkovSystem, word: Sequence[int], spec: TruncationSpec | None = None) -> Word:
    """Return ``word`` as a tuple after checking its symbols against the model."""
    w = tuple(int(a) for a in word)
    if not w:
        raise ValueError("cylinder words must be non-empty")
    for a in w:
        if a < 1:
            raise ValueError(f"symbols are naturals >= 1, got {a}")
        if a > model.branch_count:
            raise ModelError(f"symbol {a} has no branch in model {model.name!r}")
        if spec is not None and a > spec.n:
            raise ValueError(f"symbol {a} exceeds the truncation cutoff {spec.n}")
    if spec is not None and len(w) != spec.k:
        raise ValueError(f"word {w} does not have depth {spec.k}")
    return w


def enumerate_words(spec: TruncationSpec) -> Iterator[Word]:
    """All depth-k words over ``{1..n}`` in lexicographic order, streamed."""
    spec.check_budget()
    return itertools.product(range(1, spec.n + 1), repeat=spec.k)


def cylinder_interval(model: MarkovSystem, word: Sequence[int]) -> tuple[float, float]:
    """Closed cylinder interval, from the images of 0 and 1 under the composed inverse branches."""
    w = validate_word(model, word)
    a = float(model.compose(w, 0.0))
    b = float(model.compose(w, 1.0))
    return (a, b) if a <= b else (b, a)


def distortion_constant(model: MarkovSystem, k: int) -> float:
    """``exp(sum_{j<=k} var_j log|T'|)``, the multiplicative distortion on depth-k cylinders."""
    return math.exp(sum(model.log_derivative_variation(j) for j in range(1, k + 1)))


def cylinder_length(model: MarkovSystem, word: Sequence[int]) -> tuple[float, float]:
    """Length of the cylinder and the distortion bound relating it to the derivative.

    The second value ``K`` satisfies
    ``1/K <= length / exp(-S_k log|T'|(representative)) <= K``.
    """
    lo, hi = cylinder_interval(model, word)
    return hi - lo, distortion_constant(model, len(word))


def shift_representatives(model: MarkovSystem, word: Sequence[int]) -> list[float]:
    """Representatives of the shifted words ``w[i:]``, i.e. ``T^i`` of the word's representative."""
    w = validate_word(model, word)
    pts = []
    y = 1.0
    for a in reversed(w):
        y = float(model.inverse_branch(a, y))
        pts.append(y)
    return pts[::-1]


def birkhoff_sum(model: MarkovSystem, potential: Potential, word: Sequence[int]) -> float:
    """``S_k f`` along the word's representative and its ``k - 1`` shifts."""
    w = validate_word(model, word)
    pts = shift_representatives(model, w)
    return float(sum(potential.evaluate(w[i:], pts[i]) for i in range(len(w))))


def derivative_length(model: MarkovSystem, word: Sequence[int]) -> float:
    """``exp(-S_k log|T'|)`` at the representative: the derivative-based length."""
    return math.exp(-birkhoff_sum(model, model.log_derivative_potential(), word))


def concatenation_defect_bound(potential: Potential, max_depth: int = 200) -> float:
    """``sum_{m >= 1} var_m``, bounding ``|S(uv) - S(u) - S(v)|`` at representatives."""
    total = 0.0
    for m in range(1, max_depth + 1):
        v = potential.variation_bound(m)
        total += v
        if v == 0.0 or (m > 20 and v < 1e-17 * max(total, 1.0)):
            break
    return total
