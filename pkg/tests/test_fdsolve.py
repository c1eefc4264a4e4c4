import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import eigh_tridiagonal

from pointdefect.errors import GridMismatch
from pointdefect.fdsolve import (
    TridiagonalOperator,
    discretize,
    eigenvector,
    lowest_eigenvalues,
    solve,
    sturm_count,
)
from pointdefect.potential import Epsilon, UniformGrid, family_at, smear

L = 10.0


def discrete_free_levels(n, count, length=L):
    """Exact eigenvalues of the central-difference free Hamiltonian."""
    h = length / (n + 1)
    j = np.arange(1, count + 1)
    return 2.0 * np.sin(j * math.pi / (2 * (n + 1))) ** 2 / h**2


def toy_operator():
    # diag 1, off -1/2 on three points: eigenvalues 1 - cos(j pi / 4)
    return TridiagonalOperator(np.ones(3), np.full(2, -0.5), 4.0)


def test_discretize_free_entries():
    op = discretize(None, L, 9)
    assert op.h == pytest.approx(1.0)
    np.testing.assert_allclose(op.diag, np.ones(9))
    np.testing.assert_allclose(op.offdiag, np.full(8, -0.5))


def test_discretize_rejects_mismatched_grid():
    grid = UniformGrid.box_interior(L, 2047)
    pot = smear(family_at(Epsilon(5.0), 0.5), 0.1, grid)
    discretize(pot, L, 2047)
    with pytest.raises(GridMismatch):
        discretize(pot, L + 1.0, 2047)


def test_toy_spectrum_and_counts():
    op = toy_operator()
    vals = lowest_eigenvalues(op, 3)
    np.testing.assert_allclose(vals, [1 - math.sqrt(0.5), 1.0, 1 + math.sqrt(0.5)], atol=1e-12)
    assert sturm_count(op, 1.0) == 1
    assert sturm_count(op, 1.0 + 1e-9) == 2
    assert sturm_count(op, -10.0) == 0
    assert sturm_count(op, 10.0) == 3


def test_toy_eigenvector_sign_and_shape():
    pair = eigenvector(toy_operator(), 1.0)
    np.testing.assert_allclose(pair.vector, np.array([1.0, 0.0, -1.0]) / math.sqrt(2.0), atol=1e-10)
    assert pair.residual < 1e-10


@settings(max_examples=50, deadline=None)
@given(st.integers(3, 60), st.integers(0, 2**31 - 1))
def test_sturm_and_bisection_match_lapack(n, seed):
    rng = np.random.default_rng(seed)
    d = rng.uniform(-5.0, 5.0, n)
    e = rng.uniform(-2.0, 2.0, n - 1)
    op = TridiagonalOperator(d, e, 1.0)
    ref = eigh_tridiagonal(d, e, eigvals_only=True)
    for lam in rng.uniform(-8.0, 8.0, 5):
        assert sturm_count(op, lam) == int(np.sum(ref < lam))
    m = min(n, 5)
    np.testing.assert_allclose(lowest_eigenvalues(op, m), ref[:m], atol=1e-11)


def test_free_box_matches_discrete_dispersion():
    op = discretize(None, L, 1999)
    # bisection on inertia counts resolves eigenvalues to a few eps * ||H||
    atol = 10 * np.finfo(float).eps * op.gershgorin()[1]
    np.testing.assert_allclose(lowest_eigenvalues(op, 4, tol=1e-14), discrete_free_levels(1999, 4), rtol=0, atol=atol)


def test_free_box_approaches_continuum_quadratically():
    n_values = (250, 500, 1000)
    errs = []
    for n in n_values:
        e1 = lowest_eigenvalues(discretize(None, L, n), 1, tol=1e-14)[0]
        errs.append(abs(e1 - math.pi**2 / 200.0))
    ratios = [errs[i] / errs[i + 1] for i in range(2)]
    for r in ratios:
        assert r == pytest.approx(4.0, rel=0.05)


def test_energy_floor_skips_lower_states():
    op = discretize(None, L, 499)
    vals = lowest_eigenvalues(op, 5)
    above = lowest_eigenvalues(op, 2, above=0.5 * (vals[1] + vals[2]))
    np.testing.assert_allclose(above, vals[2:4], atol=1e-12)


def test_lowest_eigenvalues_validation():
    op = toy_operator()
    with pytest.raises(ValueError):
        lowest_eigenvalues(op, 0)
    with pytest.raises(ValueError):
        lowest_eigenvalues(op, 4)


def test_free_eigenvectors_match_sine_modes():
    n = 999
    op = discretize(None, L, n)
    pairs = solve(op, 3)
    x = op.grid.points
    for j, pair in enumerate(pairs, start=1):
        mode = math.sqrt(2.0 / L) * np.sin(j * math.pi * (x + L / 2) / L)
        np.testing.assert_allclose(pair.vector, mode, atol=1e-8)


def test_eigenpairs_orthonormal_and_parity():
    grid = UniformGrid.box_interior(L, 4095)
    pot = smear(family_at(Epsilon(5.0), 0.333), 0.04, grid)
    op = discretize(pot, L, 4095)
    pairs = solve(op, 4, above=0.0)
    gram = np.array([[p.vector @ q.vector * op.h for q in pairs] for p in pairs])
    np.testing.assert_allclose(gram, np.eye(4), atol=1e-8)
    for j, p in enumerate(pairs):
        assert p.residual < 1e-8
        # the potential is symmetric: states alternate even / odd
        parity = 1.0 if j % 2 == 0 else -1.0
        np.testing.assert_allclose(p.vector[::-1], parity * p.vector, atol=1e-8)


def test_solve_is_deterministic_per_seed():
    op = discretize(None, L, 301)
    a = solve(op, 2, seed=3)
    b = solve(op, 2, seed=3)
    for p, q in zip(a, b):
        np.testing.assert_array_equal(p.vector, q.vector)
