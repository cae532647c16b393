import csv
import math

import numpy as np
import pytest

from oracles import bernoulli_spectrum, oracle_spectrum
from quotient_spectrum import (
    QuotientProblem,
    TruncationSpec,
    build_finite,
    standard_potentials,
)
from quotient_spectrum.pressure import geometric_combination, pressure
from quotient_spectrum.spectrum import (
    CSV_HEADER,
    G1,
    OutOfRangeError,
    SpectrumPoint,
    boundary_summary,
    classify_regimes,
    critical_stats,
    default_grid,
    discontinuity_probe,
    endpoint_dimension,
    extrapolate_limits,
    fmt,
    level_bracket,
    solve_grid,
    spectrum_point,
    weighted_digit_pair,
    write_spectrum_csv,
    wynn_epsilon,
)

TOL = 1e-8


def finite_problem(intervals, phi, psi, k=1):
    m = build_finite(intervals, {"phi": phi, "psi": psi})
    pots = standard_potentials(m)
    return QuotientProblem(m, pots["phi"], pots["psi"], TruncationSpec(len(intervals), k))


# -- G1 ---------------------------------------------------------------------


def test_g1_at_q_zero_is_geometric_pressure(gauss_quotient_small):
    prob = gauss_quotient_small
    ref = pressure(prob.model, geometric_combination(prob.model, 0.9), prob.spec).value
    for alpha in (-3.0, 0.1, 0.3, 7.0):
        assert G1(prob, alpha, 0.0, 0.9).value == pytest.approx(ref, abs=1e-13)


def test_g1_negative_above_dimension(gauss_quotient_small):
    assert G1(gauss_quotient_small, 0.2, 0.0, 1.2).value < 0


def test_g1_flat_in_q():
    prob = finite_problem([(0.0, 0.4), (0.5, 1.0)], [1.0, 2.0], [1.0, 2.0])
    vals = [G1(prob, 1.0, q, 0.7).value for q in (-50.0, -1.0, 0.0, 3.0, 80.0)]
    assert max(vals) - min(vals) < 1e-12


def test_flat_level_takes_the_dimension_path():
    prob = finite_problem([(0.0, 0.4), (0.5, 1.0)], [1.0, 2.0], [1.0, 2.0])
    pt = spectrum_point(prob, 1.0, TOL)
    assert pt.regime == "J2" and pt.q_c is None
    assert pt.b == pytest.approx(prob.dimension(), abs=1e-12)
    with pytest.raises(OutOfRangeError):
        spectrum_point(prob, 1.1, TOL)


# -- spectrum points -----------------------------------------------------------


def test_symmetric_two_symbol_level_half():
    prob = finite_problem([(0.0, 0.4), (0.6, 1.0)], [0.0, 1.0], [1.0, 1.0])
    pt = spectrum_point(prob, 0.5, TOL)
    expected = math.log(2) / math.log(2.5)
    assert pt.b == pytest.approx(expected, abs=1e-9)
    assert pt.b == pytest.approx(prob.dimension(), abs=1e-9)
    assert pt.regime == "J2"


@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_two_symbol_closed_form(two_symbol, alpha):
    pots = standard_potentials(two_symbol)
    prob = QuotientProblem(two_symbol, pots["phi"], pots["one"], TruncationSpec(2, 1))
    pt = spectrum_point(prob, alpha, TOL)
    assert pt.b == pytest.approx(bernoulli_spectrum(alpha, (math.log(2.5), math.log(2.0))), abs=1e-8)


def test_random_three_symbol_against_block_oracle():
    rng = np.random.default_rng(17)
    for _ in range(3):
        cuts = np.sort(rng.uniform(0, 1, 6)).reshape(3, 2)
        phi = rng.normal(size=3)
        psi = rng.uniform(0.5, 2.0, 3)
        prob = finite_problem(cuts, phi, psi)
        summ = boundary_summary(prob)
        alpha = summ.alpha_min + 0.37 * (summ.alpha_max - summ.alpha_min)
        pt = spectrum_point(prob, alpha, TOL)
        ref = oracle_spectrum(prob.model, prob.numerator, prob.denominator, alpha, 3, 1, starts=30)
        # Bernoulli measures are the equilibria here, so the one-block optimum is exact
        assert pt.b == pytest.approx(ref, abs=1e-6)
        assert oracle_spectrum(prob.model, prob.numerator, prob.denominator, alpha, 3, 2, starts=10) <= pt.b + 1e-6


def test_gauss_spectrum_decreases_toward_top(gauss_quotient_small):
    b36 = spectrum_point(gauss_quotient_small, 0.36, TOL)
    b20 = spectrum_point(gauss_quotient_small, 0.2, TOL)
    assert b36.b < b20.b
    assert b36.regime == "J3" and b36.q_c > b20.q_c > 0


def test_gauss_near_zero_level(gauss, gauss_pots):
    prob = QuotientProblem(gauss, gauss_pots["log-digit"], gauss_pots["digit"], TruncationSpec(2000, 2))
    pt = spectrum_point(prob, 0.05, TOL)
    assert 0.9 <= pt.b <= 1.0
    if pt.regime != "J2":
        stats = critical_stats(prob, pt)
        ratio = stats.integrals["log-digit"] / stats.integrals["digit"]
        assert abs(ratio - 0.05) < 10 * TOL


def test_gauss_negative_levels_are_out_of_range(gauss_quotient_small):
    with pytest.raises(OutOfRangeError):
        spectrum_point(gauss_quotient_small, -0.01, TOL)
    rep = discontinuity_probe(gauss_quotient_small, "left", [-0.05, -0.02, -0.01])
    assert rep.empty and rep.sup_b is None and len(rep.out_of_range) == 3


@pytest.mark.parametrize("alpha", [0.16, 0.2, 0.28, 0.34])
def test_variational_self_consistency(gauss_quotient_small, alpha):
    prob = gauss_quotient_small
    pt = spectrum_point(prob, alpha, TOL)
    assert pt.regime in ("J1", "J3")
    stats = critical_stats(prob, pt)
    assert abs(stats.integrals["log-digit"] / stats.integrals["digit"] - alpha) < 10 * TOL
    assert abs(stats.entropy - pt.b * stats.lyapunov) < 10 * TOL
    assert abs(pt.res_G1) < 10 * TOL


def test_mp_self_consistency(mp_quotient):
    for alpha in (-0.05, 0.1):
        pt = spectrum_point(mp_quotient, alpha, TOL)
        stats = critical_stats(mp_quotient, pt)
        assert abs(stats.integrals["mp-sum"] / stats.integrals["return-time"] - alpha) < 10 * TOL
        assert abs(stats.entropy - pt.b * stats.lyapunov) < 10 * TOL


def test_spectrum_below_dimension(gauss_quotient_small):
    dim = gauss_quotient_small.dimension()
    for r in solve_grid(gauss_quotient_small, np.linspace(0.01, 0.36, 12)):
        assert r.point is not None
        assert r.point.b <= dim + 1e-6
        if r.point.regime == "J2":
            assert r.point.q_c is None and r.point.b == dim


@pytest.mark.parametrize("alpha", [0.15, 0.3])
def test_spectrum_monotone_in_alphabet(gauss, gauss_pots, alpha):
    bs = []
    for n in (20, 50, 100, 200):
        prob = QuotientProblem(gauss, gauss_pots["log-digit"], gauss_pots["digit"], TruncationSpec(n, 2))
        bs.append(spectrum_point(prob, alpha, TOL).b)
    assert all(b >= a - 1e-9 for a, b in zip(bs, bs[1:]))


def test_threads_do_not_change_results(gauss_quotient_small):
    grid = np.linspace(0.02, 0.35, 8)
    one = solve_grid(gauss_quotient_small, grid, threads=1)
    four = solve_grid(gauss_quotient_small, grid, threads=4)
    assert [r.point.csv_row() for r in one] == [r.point.csv_row() for r in four]


def test_denominator_must_be_positive(gauss, gauss_pots):
    with pytest.raises(ValueError):
        QuotientProblem(gauss, gauss_pots["digit"], gauss_pots["log-digit"], TruncationSpec(10, 2))


# -- boundaries ---------------------------------------------------------------


def test_gauss_boundaries(gauss_quotient_small):
    s = boundary_summary(gauss_quotient_small)
    assert s.alpha_min == 0.0
    assert s.alpha_max == pytest.approx(math.log(3) / 3, abs=1e-15)
    assert s.max_orbit == (3,) and s.min_orbit == (1,)
    assert abs(s.alpha_lower) < 1e-3 and abs(s.alpha_upper) < 1e-3
    assert endpoint_dimension(s, "max") == 0.0


def test_weighted_digit_boundaries(gauss):
    num, den = weighted_digit_pair(1.5, 0.5)
    prob = QuotientProblem(gauss, num, den, TruncationSpec(50, 2))
    s = boundary_summary(prob)
    assert s.alpha_max == 1.0 and s.max_orbit == (1,)
    assert abs(s.alpha_lower) < 1e-3 and abs(s.alpha_upper) < 1e-3
    assert weighted_digit_pair(0.5, 1.5)[0] is not None  # orientation does not depend on argument order
    assert boundary_summary(QuotientProblem(gauss, *weighted_digit_pair(0.5, 1.5), TruncationSpec(50, 2))).alpha_max == 1.0


def test_finite_model_has_no_accumulation_set(two_symbol):
    pots = standard_potentials(two_symbol)
    prob = QuotientProblem(two_symbol, pots["phi"], pots["one"], TruncationSpec(2, 1))
    s = boundary_summary(prob)
    assert s.E is None and s.alpha_lower is None
    assert (s.alpha_min, s.alpha_max) == (0.0, 1.0)
    assert s.U == ((0.0, 1.0),)


def test_finite_regimes_split_at_the_maximal_measure(two_symbol):
    pots = standard_potentials(two_symbol)
    prob = QuotientProblem(two_symbol, pots["phi"], pots["one"], TruncationSpec(2, 1))
    rep = classify_regimes(prob, default_grid(0.0, 1.0, 17), refine_steps=20, summary=boundary_summary(prob))
    # the frequency of symbol 2 under the measure of maximal dimension
    d = prob.dimension()
    freq = 0.5**d
    assert all(p.alpha < freq for p in rep.points if p.regime == "J1")
    assert all(p.alpha > freq for p in rep.points if p.regime == "J3")
    # the J1/J3 edge is only known up to its bisection bracket
    assert rep.reach["J1"][1] >= freq >= rep.reach["J3"][0]
    assert rep.e_inside_j2 is None and rep.j2_contiguous


def test_mp_boundaries(mp_quotient):
    s = boundary_summary(mp_quotient)
    assert s.alpha_min < 0 < s.alpha_max
    assert abs(s.alpha_lower) < 1e-3 and abs(s.alpha_upper) < 1e-3


def test_divergent_ratio(gauss, gauss_pots):
    prob = QuotientProblem(gauss, gauss_pots["digit"], standard_potentials(gauss)["power-digit:0.5"], TruncationSpec(10, 2))
    s = boundary_summary(prob, probe_cutoff=10**5)
    assert s.diverges and s.alpha_max == math.inf


def test_default_grid():
    g = default_grid(0.0, 1.28, 65)
    assert len(g) == 65 and g[0] == pytest.approx(0.01) and g[-1] == pytest.approx(1.27)
    with pytest.raises(ValueError):
        default_grid(0.0, math.inf)
    with pytest.raises(ValueError):
        default_grid(1.0, 1.0)


def test_wynn_epsilon_removes_geometric_error():
    seq = [1.0 + 0.5**j for j in range(8)]
    cols = wynn_epsilon(seq)
    assert cols[1][0] == pytest.approx(1.0, abs=1e-12)
    seq2 = [2.0 + 3.0 * 0.7**j - 0.2**j for j in range(9)]
    assert extrapolate_limits(seq2) == pytest.approx((2.0, 2.0), abs=1e-10)


# -- levels inside E -----------------------------------------------------------


def test_level_bracket_at_accumulation_level(mp_quotient):
    br = level_bracket(mp_quotient, 0.0)
    lo, hi = br.bounds
    assert br.eps in (1e-2, 1e-3, 1e-4)
    assert br.below.regime == "J1" and br.above.regime == "J2"
    assert lo < hi <= mp_quotient.dimension() + 1e-12


def test_level_bracket_out_of_range(gauss_quotient_small):
    with pytest.raises(OutOfRangeError):
        level_bracket(gauss_quotient_small, -0.5)


# -- output ----------------------------------------------------------------------


def test_csv_format(tmp_path):
    pts = [
        SpectrumPoint(0.1, 0.987654321012, None, "J2", 200, 2, 1.5e-14, None),
        SpectrumPoint(0.3, 0.5, 12.3456789012, "J3", 200, 2, -2e-12, 3e-10),
    ]
    path = tmp_path / "s.csv"
    write_spectrum_csv(path, pts)
    rows = list(csv.reader(open(path)))
    assert rows[0] == CSV_HEADER
    assert rows[1] == ["0.1", "0.987654321", "", "J2", "200", "2", "1.5e-14", ""]
    assert rows[2][2] == "12.3456789"
    assert fmt(1 / 3) == "0.333333333"
    with pytest.raises(ValueError):
        SpectrumPoint(0.1, 0.5, None, "J4", 1, 1, 0.0, None)
