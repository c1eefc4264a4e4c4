import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp, trapezoid
from scipy.linalg import expm
from scipy.optimize import brentq

from pointdefect.connmat import BoundaryKind, ConnectionMatrix, from_delta_strength, from_epsilon_strength, make_connection
from pointdefect.errors import NegativeDistance, NotAnEigenvalue, UnsupportedInteraction
from pointdefect.exact import (
    BoxSystem,
    PointInteraction,
    delta_step,
    eigenfunction,
    eigenvalues,
    free_propagator,
    spectral_function,
    train_transfer,
)
from pointdefect.potential import Chi3, Constant, DeltaTrain, Epsilon, UniformGrid, family_at, smear

L = 10.0


def free_level(n, length=L):
    return (n * math.pi / length) ** 2 / 2.0


def roots_of(g, brackets):
    return [brentq(g, lo, hi, xtol=1e-15) for lo, hi in brackets]


def epsilon_odd_levels(c, count, length=L):
    """Odd states of the epsilon box: tan(kL/2) = -c k."""
    half = length / 2.0
    g = lambda k: math.sin(k * half) + c * k * math.cos(k * half)
    brackets = [((2 * j + 1) * math.pi / length + 1e-12, (2 * j + 2) * math.pi / length) for j in range(count)]
    return [k * k / 2.0 for k in roots_of(g, brackets)]


def ivp_residual(matrix, energy, length=L):
    """Dirichlet residual at the right edge from direct ODE integration."""
    rhs = lambda x, w: [-2.0 * energy * w[1], w[0]]
    opts = dict(rtol=1e-12, atol=1e-14, method="DOP853")
    left = solve_ivp(rhs, (-length / 2, 0.0), [1.0, 0.0], **opts).y[:, -1]
    right = solve_ivp(rhs, (0.0, length / 2), matrix @ left, **opts).y[:, -1]
    return right[1]


# --- propagators --------------------------------------------------------------------


@settings(max_examples=80, deadline=None)
@given(st.floats(-3.0, 3.0), st.floats(0.0, 4.0))
def test_free_propagator_matches_matrix_exponential(energy, d):
    generator = np.array([[0.0, -2.0 * energy], [1.0, 0.0]])
    expected = expm(generator * d)
    got = free_propagator(energy, d).m
    np.testing.assert_allclose(got, expected, rtol=1e-9, atol=1e-9 * max(1.0, float(np.max(np.abs(expected)))))


@settings(max_examples=80, deadline=None)
@given(st.floats(-2.0, 2.0), st.floats(0.0, 3.0), st.floats(0.0, 3.0))
def test_free_propagator_group_property_and_det(energy, d1, d2):
    p1, p2 = free_propagator(energy, d1), free_propagator(energy, d2)
    both = free_propagator(energy, d1 + d2).m
    scale = max(1.0, float(np.max(np.abs(both))))
    np.testing.assert_allclose(p2.m @ p1.m, both, atol=1e-11 * scale)
    assert p1.det == pytest.approx(1.0, abs=1e-10 * scale**2)


def test_free_propagator_zero_energy_and_errors():
    np.testing.assert_allclose(free_propagator(0.0, 2.0).m, [[1.0, 0.0], [2.0, 1.0]])
    np.testing.assert_array_equal(free_propagator(0.7, 0.0).m, np.eye(2))
    with pytest.raises(NegativeDistance):
        free_propagator(0.5, -1e-3)


def test_delta_step_matrix():
    np.testing.assert_array_equal(delta_step(0.25).m, [[1.0, 0.5], [0.0, 1.0]])


def test_single_spike_train_is_delta_step():
    t = DeltaTrain.from_pairs([(0.3, 1.7)])
    np.testing.assert_array_equal(train_transfer(t, 0.4).m, delta_step(1.7).m)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-20.0, 20.0), min_size=2, max_size=6), st.floats(0.0, 2.0), st.floats(0.01, 0.5))
def test_train_transfer_unimodular(strengths, energy, a):
    t = DeltaTrain.from_pairs([(j * a, v) for j, v in enumerate(strengths)])
    m = train_transfer(t, energy).m
    assert np.linalg.det(m) == pytest.approx(1.0, abs=1e-9 * max(1.0, float(np.max(np.abs(m)))) ** 2)


@pytest.mark.parametrize(
    "family,a,tol",
    [(Epsilon(5.0), 1e-4, 1e-2), (Constant(1.0, 1.0), 1e-5, 1e-3)],
)
def test_train_transfer_approaches_target(family, a, tol):
    m = train_transfer(family_at(family, a), 0.045).m
    assert np.max(np.abs(m - family.target().as_array())) < tol


def test_chi3_train_error_shrinks_with_a():
    fam = Chi3(-2.0, 1.0, -1.0, 1.0)
    errs = [np.max(np.abs(train_transfer(family_at(fam, a), 0.5).m - fam.target().as_array())) for a in (0.1, 0.01, 0.001)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-2


# --- spectra ----------------------------------------------------------------------------


def test_free_box_levels():
    spec = eigenvalues(BoxSystem(L), (0.0, 0.5), max_count=5)
    np.testing.assert_allclose(spec.eigenvalues, [free_level(n) for n in (1, 2, 3)], rtol=1e-11)


def test_free_box_neumann_edges():
    both = eigenvalues(BoxSystem(L, BoundaryKind.NEUMANN, BoundaryKind.NEUMANN), (1e-3, 0.2))
    np.testing.assert_allclose(both.eigenvalues, [free_level(1), free_level(2)], rtol=0, atol=2e-12)
    mixed = eigenvalues(BoxSystem(L, BoundaryKind.NEUMANN, BoundaryKind.DIRICHLET), (0.0, 0.35))
    np.testing.assert_allclose(mixed.eigenvalues, [free_level(n + 0.5) for n in range(3)], rtol=0, atol=2e-12)


def test_epsilon_box_against_transcendental_oracle():
    sys = BoxSystem(L, interaction=PointInteraction(from_epsilon_strength(5.0)))
    spec = eigenvalues(sys, (0.0, 1.0), max_count=6)
    odd = epsilon_odd_levels(5.0, 3)
    even = [free_level(1), free_level(3), free_level(5)]
    expected = [e for e in sorted(odd + even) if e <= 1.0]
    np.testing.assert_allclose(spec.eigenvalues, expected, rtol=1e-10)
    assert odd[0] == pytest.approx((2.0287578 / 5.0) ** 2 / 2.0, rel=1e-7)


def test_delta_box_against_transcendental_oracle():
    v = 1.0
    sys = BoxSystem(L, interaction=PointInteraction(from_delta_strength(v)))
    g = lambda k: v * math.sin(k * L / 2) + k * math.cos(k * L / 2)
    even = [k * k / 2 for k in roots_of(g, [(1e-6, 2 * math.pi / L), (2 * math.pi / L, 4 * math.pi / L)])]
    spec = eigenvalues(sys, (0.0, 1.0), max_count=4)
    expected = sorted(even + [free_level(2), free_level(4)])
    np.testing.assert_allclose(spec.eigenvalues, expected, rtol=1e-10)


def test_general_point_interaction_against_ode_integration():
    t = make_connection(-2.0, 1.0, -1.0, 1.0)
    spec = eigenvalues(BoxSystem(L, interaction=PointInteraction(t)), (0.0, 2.0), max_count=4)
    assert len(spec) == 4
    for e in spec.eigenvalues:
        lo, hi = ivp_residual(t.as_array(), e - 1e-7), ivp_residual(t.as_array(), e + 1e-7)
        assert lo * hi < 0


def test_attractive_delta_bound_state():
    v = -1.0
    sys = BoxSystem(L, interaction=DeltaTrain.from_pairs([(0.0, v)]))
    spec = eigenvalues(sys, (-3.0, 0.0))
    # even bound state in the box: kappa coth(kappa L / 2) = -v
    kappa = brentq(lambda q: q / math.tanh(q * L / 2) + v, 0.5, 2.0, xtol=1e-15)
    assert spec.eigenvalues == pytest.approx((-kappa**2 / 2,), abs=1e-11)
    assert spec[0] == pytest.approx(-0.5, abs=1e-3)


def test_mirrored_train_has_same_spectrum():
    train = family_at(Chi3(-2.0, 1.0, -1.0, 1.0), 0.05)
    a = eigenvalues(BoxSystem(L, interaction=train), (0.0, 3.0))
    b = eigenvalues(BoxSystem(L, interaction=train.mirrored()), (0.0, 3.0))
    np.testing.assert_allclose(a.eigenvalues, b.eigenvalues, rtol=1e-10)


def test_mirrored_point_interaction_has_same_spectrum():
    t = make_connection(-2.0, 1.0, -1.0, 1.0).as_array()
    r = np.diag([-1.0, 1.0])
    mirror = ConnectionMatrix.from_array(r @ np.linalg.inv(t) @ r)
    a = eigenvalues(BoxSystem(L, interaction=PointInteraction(ConnectionMatrix.from_array(t))), (0.0, 1.0))
    b = eigenvalues(BoxSystem(L, interaction=PointInteraction(mirror)), (0.0, 1.0))
    np.testing.assert_allclose(a.eigenvalues, b.eigenvalues, rtol=1e-10)


@pytest.mark.parametrize("c", [0.3, 5.0, -2.0, 100.0])
def test_even_states_do_not_see_epsilon(c):
    spec = eigenvalues(BoxSystem(L, interaction=PointInteraction(from_epsilon_strength(c))), (0.0, 0.6), max_count=10)
    for n in (1, 3):
        assert min(abs(e - free_level(n)) for e in spec.eigenvalues) < 1e-12


def test_point_limit_of_chi3_trains():
    fam = Chi3(-2.0, 1.0, -1.0, 1.0)
    point = eigenvalues(BoxSystem(L, interaction=PointInteraction(fam.target())), (0.0, 1.0), max_count=3)
    errs = []
    for a in (0.1, 0.03, 0.01):
        spec = eigenvalues(BoxSystem(L, interaction=family_at(fam, a)), (0.0, 1.0), max_count=3)
        errs.append(max(abs(x - y) / y for x, y in zip(spec.eigenvalues, point.eigenvalues)))
    assert errs[0] > errs[1] > errs[2]


def test_hidden_pair_is_resolved_with_warning():
    sys = BoxSystem(L, interaction=PointInteraction(from_epsilon_strength(1e6)))
    spec = eigenvalues(sys, (0.0, 0.1), max_count=2)
    assert len(spec) == 2
    assert any(w.startswith("ScanTooCoarse") for w in spec.warnings)
    assert spec[0] == pytest.approx(free_level(1), rel=1e-9)


def test_window_validation_and_sampled_rejection():
    with pytest.raises(ValueError):
        eigenvalues(BoxSystem(L), (1.0, 0.0))
    grid = UniformGrid.box_interior(L, 2047)
    pot = smear(DeltaTrain.from_pairs([(0.0, 1.0)]), 0.1, grid)
    with pytest.raises(UnsupportedInteraction):
        BoxSystem(L, interaction=pot)
    with pytest.raises(ValueError):
        BoxSystem(L, interaction=DeltaTrain.from_pairs([(6.0, 1.0)]))


def test_spectral_function_vanishes_at_free_levels():
    assert abs(spectral_function(BoxSystem(L), free_level(2))) < 1e-12
    assert abs(spectral_function(BoxSystem(L), 0.1)) > 0.1


# --- eigenfunctions --------------------------------------------------------------------


def test_free_ground_state_shape_and_norm():
    e = eigenvalues(BoxSystem(L), (0.0, 0.1))[0]
    ef = eigenfunction(BoxSystem(L), e)
    expected = math.sqrt(2.0 / L) * np.cos(math.pi * ef.x / L)
    np.testing.assert_allclose(np.abs(ef.psi), expected, atol=1e-9)
    assert ef.boundary.psi_minus == ef.boundary.psi_plus


def test_eigenfunction_normalization_by_quadrature():
    sys = BoxSystem(L, interaction=family_at(Epsilon(5.0), 0.333))
    e = eigenvalues(sys, (0.0, 1.0))[1]
    x = np.linspace(-L / 2, L / 2, 400001)
    ef = eigenfunction(sys, e, grid=x)
    assert trapezoid(ef.psi**2, ef.x) == pytest.approx(1.0, abs=1e-6)
    assert ef.psi[0] == pytest.approx(0.0, abs=1e-9) and ef.psi[-1] == pytest.approx(0.0, abs=1e-9)


def test_epsilon_eigenfunction_jump():
    c = 5.0
    sys = BoxSystem(L, interaction=PointInteraction(from_epsilon_strength(c)))
    spec = eigenvalues(sys, (0.0, 1.0))
    for e in spec.eigenvalues:
        bd = eigenfunction(sys, e).boundary
        assert bd.dpsi_plus == pytest.approx(bd.dpsi_minus, abs=1e-12)
        assert bd.psi_plus - bd.psi_minus == pytest.approx(2 * c * bd.dpsi_minus, abs=1e-10)


def test_eigenfunction_samples_right_limit_at_site():
    sys = BoxSystem(L, interaction=PointInteraction(from_epsilon_strength(5.0)))
    e = eigenvalues(sys, (0.0, 0.1))[1]
    ef = eigenfunction(sys, e, grid=[-1e-9, 0.0])
    scale = ef.boundary
    assert ef.psi[1] == pytest.approx(scale.psi_plus, abs=1e-12)
    assert ef.psi[0] == pytest.approx(scale.psi_minus, abs=1e-7)


def test_not_an_eigenvalue():
    with pytest.raises(NotAnEigenvalue):
        eigenfunction(BoxSystem(L), 0.1)


def test_neumann_limit_eigenfunction_has_zero_slope():
    sys = BoxSystem(L, interaction=PointInteraction(from_epsilon_strength(1e6)))
    for e in eigenvalues(sys, (0.0, 0.1)).eigenvalues:
        ef = eigenfunction(sys, e, grid=UniformGrid(-L / 2, L / 1000, 1001))
        bd = ef.boundary
        assert abs(bd.dpsi_minus) / (ef.k * bd.scale(ef.k)) < 1e-5


@pytest.mark.parametrize("v", [1e6, 1e9])
def test_strong_delta_pairs_are_split(v):
    sys = BoxSystem(L, interaction=DeltaTrain.from_pairs([(0.0, v)]))
    spec = eigenvalues(sys, (0.0, 1.0))
    assert len(spec) == 4
    # odd partner is the unperturbed level; tan(kL/2) = -k/v puts the even one 4/(vL) below it
    assert spec[1] == pytest.approx(free_level(2), abs=1e-12)
    gap = (spec[1] - spec[0]) / spec[1]
    assert gap == pytest.approx(4.0 / (v * L), rel=1e-3)
