import numpy as np
import pytest
from hypothesis import given, strategies as st

from ncorlicz.errors import RankTooLarge, ShapeMismatch
from ncorlicz.operators import (
    AlgebraShape,
    BlockOperator,
    SingularValueProfile,
    distribution,
    measure_gauge,
    mu_at,
    random_operator,
    random_shape,
    random_unitary,
    singular_value_profile,
    spawn_rng,
    spectrum_abs,
)

from .strategies import operator_pairs, operators, shapes

D132 = BlockOperator.single_block(np.diag([1.0, 3.0, 2.0]))


def pairs(sigma, weights):
    return sorted(zip(np.round(sigma, 12).tolist(), weights.tolist()))


# -- spectra and profiles ----------------------------------------------------------------

def test_spectrum_examples():
    assert pairs(*spectrum_abs(D132)) == [(1.0, 1.0), (2.0, 1.0), (3.0, 1.0)]
    sig, _ = spectrum_abs(BlockOperator.zeros(AlgebraShape(((3, 1.0),))))
    assert np.all(sig == 0)
    nil = BlockOperator.single_block(np.array([[0.0, 2.0], [0.0, 0.0]]))
    assert pairs(*spectrum_abs(nil, check=True)) == [(0.0, 1.0), (2.0, 1.0)]


def test_profile_examples():
    assert singular_value_profile(D132).steps == [(3.0, 1.0), (2.0, 1.0), (1.0, 1.0)]
    e = random_operator(AlgebraShape(((3, 2.0),)), "projection", 7, ranks=2)
    assert e.profile.levels == pytest.approx([1.0], rel=1e-12)
    assert e.profile.widths == pytest.approx([4.0], rel=1e-12)
    merged = BlockOperator.atomic([2.0, 2.0], [0.5, 1.5])
    assert merged.profile.steps == [(2.0, 2.0)]


def test_profile_drops_zero_levels():
    x = BlockOperator.atomic([0.0, 1.0, 0.0], [1.0, 2.0, 3.0])
    assert x.profile.steps == [(1.0, 2.0)]
    assert len(BlockOperator.zeros(x.shape).profile) == 0


def test_profile_merge_is_relative():
    tiny = BlockOperator.atomic([1e-20, 1e-20 * (1 + 1e-14), 2e-20])
    assert [w for _, w in tiny.profile.steps] == [1.0, 2.0]


def test_distribution_examples():
    assert distribution(D132, 1.5) == 2.0
    assert distribution(D132, 3.0) == 0.0
    assert distribution(BlockOperator.atomic([2.0, 2.0], [0.5, 1.5]), 1.0) == 2.0


def test_mu_examples():
    assert mu_at(D132, 0.0) == 3.0
    assert mu_at(D132, 1.0) == 2.0
    assert mu_at(D132, 3.5) == 0.0
    with pytest.raises(ValueError):
        mu_at(D132, -1.0)


def test_measure_gauge_examples():
    assert measure_gauge(D132, D132, 0.1) == 0.0
    x = BlockOperator.single_block(np.diag([0.5, 3.0]))
    assert measure_gauge(x, BlockOperator.zeros(x.shape), 1.0) == 1.0
    e = random_operator(AlgebraShape(((4, 0.7),)), "projection", 3, ranks=1)
    assert measure_gauge(5.0 * e, BlockOperator.zeros(e.shape), 2.0) == pytest.approx(0.7)
    with pytest.raises(ShapeMismatch):
        measure_gauge(D132, BlockOperator.atomic([1.0]), 1.0)


# -- arithmetic -------------------------------------------------------------------------

def test_arithmetic_examples():
    x = BlockOperator.single_block(np.diag([1.0, 2.0]))
    assert x + BlockOperator.zeros(x.shape) == x
    assert BlockOperator.single_block(np.diag([-2.0, 1.0])).abs() == BlockOperator.single_block(np.diag([2.0, 1.0]))
    assert x @ BlockOperator.single_block(np.diag([3.0, 1.0])) == BlockOperator.single_block(np.diag([3.0, 2.0]))
    with pytest.raises(ShapeMismatch):
        x + D132


@given(operators())
def test_abs_squares_to_gram(x):
    a = x.abs()
    for ab, b in zip(a.blocks, x.blocks):
        gram = b.conj().T @ b
        assert np.linalg.norm(ab @ ab - gram) <= 1e-8 * max(np.linalg.norm(b) ** 2, 1e-300)
    assert a.is_psd()


def test_operators_are_immutable():
    with pytest.raises(ValueError):
        D132.blocks[0][0, 0] = 5.0


# -- random generation -----------------------------------------------------------------

def test_random_operator_is_deterministic():
    shape = random_shape(11)
    a = random_operator(shape, "diagonal_uniform", 5)
    b = random_operator(shape, "diagonal_uniform", 5)
    assert a == b
    assert spawn_rng(3, 1).uniform() == spawn_rng(3, 1).uniform() != spawn_rng(3, 2).uniform()


@pytest.mark.parametrize("seed", range(20))
def test_projection_and_wishart_ensembles(seed):
    shape = random_shape(seed)
    e = random_operator(shape, "projection", seed, ranks=1)
    assert e.is_projection(1e-12)
    assert e.trace().real == pytest.approx(sum(shape.weights), rel=1e-12)
    w = random_operator(shape, "wishart", seed)
    assert all(np.linalg.eigvalsh(b).min() >= -1e-12 for b in w.blocks)


def test_rank_too_large():
    with pytest.raises(RankTooLarge):
        random_operator(AlgebraShape(((2, 1.0),)), "projection", 0, ranks=3)


def test_shape_validation():
    with pytest.raises(ValueError):
        AlgebraShape(((2, 0.0),))
    with pytest.raises(ValueError):
        AlgebraShape(((0, 1.0),))


# -- properties ------------------------------------------------------------------------

@given(operators())
def test_trace_formula_two_groupings(x):
    sig, w = x.spectrum
    for phi in (lambda s: s**1.5, lambda s: s**3, np.expm1):
        direct = float(np.sum(w * phi(sig)))
        grouped = x.profile.integral(phi)
        assert grouped == pytest.approx(direct, rel=1e-12, abs=1e-12)


@given(operators(), st.floats(0.0, 40.0))
def test_profile_is_generalized_inverse_of_distribution(x, t):
    p = x.profile
    assert distribution(x, mu_at(x, t)) <= t
    s = mu_at(x, t)
    assert p(p.distribution(s)) <= s


@given(operators(), st.floats(0.0, 40.0))
def test_profile_inf_formula(x, t):
    """mu_t = inf{s : d(s) <= t}, checked against every candidate level."""
    sig, _ = x.spectrum
    candidates = np.concatenate([[0.0], sig])
    ok = [s for s in candidates if distribution(x, s) <= t]
    assert mu_at(x, t) == pytest.approx(min(ok), abs=1e-12 * max(1.0, sig.max(initial=0)))


@given(operator_pairs(), st.floats(0.0, 20.0), st.floats(0.0, 20.0))
def test_subadditivity(xy, t, s):
    x, y = xy
    assert mu_at(x + y, t + s) <= mu_at(x, t) + mu_at(y, s) + 1e-9 * max(1.0, x.norm_inf() + y.norm_inf())


@given(operators(), st.integers(0, 2**31 - 1))
def test_unitary_invariance(x, seed):
    rng = np.random.default_rng(seed)
    u = BlockOperator(x.shape, tuple(random_unitary(n, rng) for n in x.shape.dims))
    v = BlockOperator(x.shape, tuple(random_unitary(n, rng) for n in x.shape.dims))
    a, b = x.profile, (u @ x @ v).profile
    assert len(a) == len(b)
    assert np.allclose(a.levels, b.levels, rtol=0, atol=1e-9 * max(1.0, a.sup))
    assert np.allclose(a.widths, b.widths, rtol=1e-12)


@given(operators(), st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_scaling(x, alpha):
    if alpha == 0:
        assert len((alpha * x).profile) == 0
        return
    a, b = x.profile, (alpha * x).profile
    # singular values carry normwise, not componentwise, accuracy
    assert np.allclose(b.levels, abs(alpha) * a.levels, rtol=1e-12, atol=1e-12 * b.sup)


@given(operator_pairs(), st.floats(0.0, 20.0))
def test_monotone_in_psd_order(gh, t):
    g, h = gh
    lo = g @ g.adjoint()
    hi = lo + h @ h.adjoint()
    assert mu_at(lo, t) <= mu_at(hi, t) + 1e-9 * max(1.0, hi.norm_inf())


def test_profile_validation():
    with pytest.raises(ValueError):
        SingularValueProfile(np.array([1.0, 2.0]), np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        SingularValueProfile(np.array([1.0]), np.array([0.0]))


@given(shapes())
def test_identity_profile(shape):
    one = BlockOperator.identity(shape)
    assert one.profile.levels.tolist() == [1.0]
    assert one.profile.total_width == pytest.approx(shape.total_trace)
