import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ncorlicz.errors import (
    ConjugateDiverges,
    DegenerateGrid,
    InvalidOrliczFunction,
    NegativeArgument,
    OutOfDomain,
    Unreachable,
)
from ncorlicz.orlicz import (
    ExpMinusOne,
    Power,
    PowerLog,
    Tabulated,
    conjugate,
    conjugate_values,
    delta2_probe,
    from_dict,
    inverse,
    power_pair,
    right_derivative,
    young_gap,
)

from .strategies import orlicz_functions, tabulated

KNOTS = [(0, 0), (1, 1), (2, 3)]


# -- evaluation ----------------------------------------------------------------------

def test_eval_examples():
    assert Power(2)(0.0) == 0.0
    assert Power(2)(3.0) == 9.0
    assert ExpMinusOne()(1.0) == pytest.approx(1.718281828, abs=1e-9)


def test_eval_is_vectorized_and_infinite_past_domain():
    phi = Power(2, domain_max=2.0)
    out = phi(np.array([1.0, 2.0, 3.0]))
    assert out.tolist() == [1.0, 4.0, math.inf]


def test_negative_argument():
    with pytest.raises(NegativeArgument):
        Power(2)(-1.0)


def test_right_derivative_examples():
    assert right_derivative(Power(2), 3.0) == 6.0
    assert right_derivative(ExpMinusOne(), 0.0) == 1.0
    assert right_derivative(Tabulated.from_knots(KNOTS), 1.0) == 2.0


def test_right_derivative_out_of_domain():
    with pytest.raises(OutOfDomain):
        Power(2, domain_max=1.0).derivative(1.0)


def test_inverse_examples():
    assert inverse(Power(2), 25.0) == pytest.approx(5.0, rel=1e-15)
    for phi in (Power(3), ExpMinusOne(), PowerLog(2), Tabulated.from_knots(KNOTS)):
        assert inverse(phi, 0.0) == 0.0
    assert inverse(ExpMinusOne(), math.e - 1.0) == pytest.approx(1.0, rel=1e-12)


def test_inverse_unreachable():
    with pytest.raises(Unreachable):
        Power(2, domain_max=2.0).inverse(5.0)


def test_tabulated_interpolates_and_extrapolates_last_slope():
    phi = from_dict({"kind": "tabulated", "knots": [[0, 0], [1, 1], [2, 3]]})
    assert phi(1.5) == pytest.approx(2.0)
    assert phi(3.0) == pytest.approx(5.0)
    assert phi.slope_at_infinity == 2.0


def test_tabulated_rejects_concave_knots():
    with pytest.raises(InvalidOrliczFunction):
        Tabulated.from_knots([(1, 2), (2, 3)])


def test_power_rejects_exponent_below_one():
    with pytest.raises(InvalidOrliczFunction):
        Power(0.5)


def test_from_dict_round_trip():
    for phi in (Power(2.5, 0.3), ExpMinusOne(), PowerLog(2.0), Tabulated.from_knots(KNOTS)):
        assert from_dict(phi.to_dict()) == phi


# -- invariants on random Orlicz functions --------------------------------------------

@given(orlicz_functions, st.floats(0.0, 20.0), st.floats(0.0, 20.0), st.floats(0.0, 1.0))
def test_convexity_and_monotonicity(phi, a, b, t):
    a, b = min(a, b), max(a, b)
    mid = phi(t * a + (1 - t) * b)
    chord = t * phi(a) + (1 - t) * phi(b)
    assert mid <= chord + 1e-12 * max(1.0, chord)
    assert phi(a) <= phi(b)


@given(orlicz_functions, st.floats(1e-6, 50.0))
def test_positive_off_zero(phi, u):
    assert phi(0.0) == 0.0
    assert phi(u) > 0.0


@given(orlicz_functions, st.floats(1e-3, 10.0))
def test_inverse_of_eval(phi, u):
    y = phi(u)
    assert inverse(phi, y) == pytest.approx(u, rel=1e-9)


@given(orlicz_functions, st.floats(0.0, 10.0), st.floats(0.0, 10.0))
def test_right_derivative_nondecreasing(phi, a, b):
    a, b = min(a, b), max(a, b)
    assert phi.derivative(a) <= phi.derivative(b) * (1 + 1e-12)


def test_grows_without_bound():
    for phi in (Power(1), Power(3, 0.01), ExpMinusOne(), PowerLog(1)):
        assert phi(1e8) > 1e6


# -- conjugation --------------------------------------------------------------------

def test_conjugate_examples():
    assert conjugate_values(Power(2, 0.5), 3.0) == pytest.approx(4.5, rel=1e-12)
    assert conjugate_values(Power(2, 0.5), 0.0) == 0.0
    # brute-force v-grid maximization oracle
    v = np.linspace(0.0, 5.0, 2_000_001)
    oracle = float(np.max(v - v**3 / 3.0))
    assert oracle == pytest.approx(2.0 / 3.0, abs=1e-9)
    assert conjugate_values(Power(3, 1 / 3), 1.0) == pytest.approx(oracle, rel=1e-10)


def test_conjugate_table_matches_closed_form():
    psi = conjugate(Power(2, 0.5))
    assert psi.tab_error < 1e-3
    u = np.geomspace(1e-3, 1e3, 50)
    assert np.allclose(psi(u), 0.5 * u**2, rtol=2 * psi.tab_error + 1e-9, atol=1e-12)


def test_conjugate_of_linear_growth_diverges():
    with pytest.raises(ConjugateDiverges):
        conjugate_values(Tabulated.from_knots(KNOTS), 3.0)
    with pytest.raises(ConjugateDiverges):
        Power(1).conjugate_exact()


def test_conjugate_degenerate_grid():
    with pytest.raises(DegenerateGrid):
        conjugate(Power(2), (1.0, 0.5, 10))


def test_exact_power_conjugate():
    psi = Power(3).conjugate_exact()  # sup_v (uv - v^3) = 2 (u/3)^(3/2)
    u = np.array([0.5, 1.0, 7.0])
    assert np.allclose(psi(u), 2 * (u / 3) ** 1.5, rtol=1e-14)
    assert np.allclose(conjugate_values(Power(3), u), psi(u), rtol=1e-10)


def test_power_pairs():
    phi, psi = power_pair(3.0)
    assert (phi.scale, psi.p, psi.scale) == pytest.approx((1 / 3, 1.5, 2 / 3))
    phi_n, psi_n = power_pair(3.0, normalized=True)
    assert (phi_n.scale, psi_n.scale) == (1.0, 1.0)
    # the unnormalized pair is complementary only up to constants
    assert conjugate_values(phi_n, 1.0) != pytest.approx(psi_n(1.0))


def test_conjugate_order_reversal():
    small, big = Power(2, 0.5), Power(2, 1.0)
    u = np.geomspace(1e-2, 1e2, 40)
    assert np.all(conjugate_values(small, u) >= conjugate_values(big, u))


@pytest.mark.parametrize("phi", [Power(2, 0.5), Power(3), PowerLog(2), ExpMinusOne()])
def test_biconjugation(phi):
    psi = conjugate(phi, (1e-4, 1e4, 1024))
    u = np.geomspace(1e-2, 3.0, 25)
    back = conjugate_values(psi, u)
    eps = psi.tab_error
    assert np.all(np.abs(back - phi(u)) <= 10 * eps * np.maximum(1.0, phi(u)) + 1e-9)


# -- Young's inequality ---------------------------------------------------------------

def test_young_gap_examples():
    phi, psi = Power(2, 0.5), Power(2, 0.5)
    assert young_gap(phi, psi, 2.0, 3.0) == pytest.approx(0.5)
    assert young_gap(phi, psi, 2.0, 2.0) == 0.0
    assert young_gap(ExpMinusOne(), conjugate(ExpMinusOne()), 0.0, 0.0) == 0.0


@given(orlicz_functions, st.floats(0.0, 5.0), st.floats(0.0, 5.0))
def test_young_inequality(phi, u, v):
    if v > phi.slope_at_infinity:
        return
    psi_v = conjugate_values(phi, v)
    assert phi(u) + psi_v - u * v >= -1e-9 * max(1.0, u * v)


@given(orlicz_functions, st.floats(0.01, 5.0))
def test_young_equality_at_derivative(phi, u):
    v = phi.derivative(u)
    gap = phi(u) + conjugate_values(phi, v) - u * v
    assert abs(gap) <= 1e-8 * max(1.0, u * v)


# -- Delta_2 probe --------------------------------------------------------------------

def test_delta2_examples():
    rep = delta2_probe(Power(3), (1e-3, 1e3, 200), 1e6)
    assert rep.verdict == "Holds" and rep.k_estimate == pytest.approx(8.0, abs=1e-9)
    rep = delta2_probe(ExpMinusOne(), (1e-3, 40, 200), 1e6)
    assert rep.verdict == "FailsEmpirically"
    assert rep.witness_u == pytest.approx(40.0)
    assert math.log(rep.k_estimate) == pytest.approx(40.0, abs=1e-9)
    rep = delta2_probe(Power(1), (1e-2, 1e2, 17), 10.0)
    assert rep.verdict == "Holds" and rep.k_estimate == pytest.approx(2.0)


@given(st.floats(1.0, 6.0), st.floats(0.1, 10.0))
def test_delta2_power_constant(p, c):
    rep = delta2_probe(Power(p, c))
    assert rep.verdict == "Holds"
    assert rep.k_estimate == pytest.approx(2.0**p, abs=1e-9)


@given(tabulated())
def test_delta2_tabulated_holds(phi):
    assert delta2_probe(phi).verdict == "Holds"


def test_delta2_degenerate_grid():
    with pytest.raises(DegenerateGrid):
        delta2_probe(Power(2), (0.0, 1.0, 10))
    with pytest.raises(DegenerateGrid):
        delta2_probe(Power(2), (1e-3, 1.0, 10), threshold=0.5)
