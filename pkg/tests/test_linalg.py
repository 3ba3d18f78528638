import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eomnet import build_coefficient_matrix, preset
from eomnet.errors import ConvergenceError, SingularMatrixError
from eomnet.linalg import Polynomial, char_poly, det, eigenvalues, inverse, lu_solve, poly_roots


def _well_conditioned(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return a + n * np.eye(n)


# -- LU ----------------------------------------------------------------


def test_identity_solve_returns_rhs():
    b = np.arange(8, dtype=complex).reshape(4, 2) * (1 + 2j)
    assert np.array_equal(lu_solve(np.eye(4), b), b)


def test_diagonal_inverse():
    x = lu_solve(np.diag([2, 4j]), np.eye(2))
    assert np.allclose(x, np.diag([0.5, -0.25j]), rtol=0, atol=1e-15)


@pytest.mark.parametrize("seed", range(10))
def test_random_residual(seed):
    rng = np.random.default_rng(seed)
    a = _well_conditioned(rng, 5)
    b = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
    x = lu_solve(a, b)
    assert np.max(np.abs(a @ x - b)) <= 1e-10 * np.max(np.abs(b))


def test_vector_rhs_keeps_shape():
    a = np.array([[1, 2], [3, 4]], dtype=complex)
    x = lu_solve(a, [1, 1])
    assert x.shape == (2,)
    assert np.allclose(a @ x, [1, 1])


def test_pivoting_handles_zero_leading_entry():
    a = np.array([[0, 1], [1, 0]], dtype=complex)
    assert np.allclose(inverse(a), a)


def test_singular_reports_pivot_column():
    a = np.array([[1, 2, 3], [2, 4, 6], [1, 0, 1]], dtype=complex)
    with pytest.raises(SingularMatrixError) as info:
        lu_solve(a, np.eye(3))
    assert info.value.column == 2


def test_near_singular_threshold_is_relative():
    # pivot 1e-15 on a unit-scale matrix is below 1e-14 * max|a|
    a = np.array([[1, 0], [0, 1e-15]], dtype=complex)
    with pytest.raises(SingularMatrixError):
        lu_solve(a, np.eye(2))
    # a uniformly tiny but well-conditioned matrix is fine
    tiny = np.diag([1e-20, 2e-20]).astype(complex)
    assert np.allclose(lu_solve(tiny, np.eye(2)) @ tiny, np.eye(2))


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        lu_solve(np.eye(3), np.ones(2))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_inverse_times_a_is_identity(n, seed):
    a = _well_conditioned(np.random.default_rng(seed), n)
    assert np.max(np.abs(inverse(a) @ a - np.eye(n))) <= 1e-10 * np.linalg.cond(a)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_det_sign_and_value(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    ref = np.linalg.det(a)
    assert abs(det(a) - ref) <= 1e-9 * max(1.0, abs(ref))


def test_det_of_singular_is_zero():
    assert det(np.zeros((3, 3))) == 0


# -- characteristic polynomial -----------------------------------------


def test_char_poly_diagonal():
    assert char_poly(np.diag([1.0, 2.0])).coeffs == (2, -3, 1)


def test_char_poly_rotation():
    p = char_poly([[0, 1], [-1, 0]])
    assert np.allclose(p.coeffs, (1, 0, 1))


@pytest.mark.parametrize("seed", range(5))
def test_char_poly_vanishes_at_roots(seed):
    a = np.random.default_rng(seed).standard_normal((4, 4))
    p = char_poly(a)
    scale = max(abs(c) for c in p.coeffs)
    for z in poly_roots(p):
        assert abs(p(z)) <= 1e-8 * scale


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 7), st.integers(0, 2**32 - 1))
def test_char_poly_monic_with_degree_n(n, seed):
    a = np.random.default_rng(seed).standard_normal((n, n))
    p = char_poly(a)
    assert p.degree == n
    assert p.coeffs[-1] == 1


def _set_distance(a, b):
    b = list(b)
    worst = 0.0
    for z in a:
        k = min(range(len(b)), key=lambda i: abs(b[i] - z))
        worst = max(worst, abs(b.pop(k) - z))
    return worst


# -- roots -------------------------------------------------------------


def test_roots_of_x2_plus_1():
    r = sorted(poly_roots([1, 0, 1]), key=lambda z: z.imag)
    assert abs(r[0] + 1j) < 1e-12 and abs(r[1] - 1j) < 1e-12


def test_roots_of_fig2_damping_polynomial():
    m = np.diag([1, 1, 1e-3, 16]) / 2
    got = sorted(poly_roots(char_poly(m)), key=lambda z: z.real)
    for g, want in zip(got, [0.0005, 0.5, 0.5, 8.0]):
        # the double root at 0.5 is only resolved to about sqrt(eps)
        assert abs(g - want) < 1e-6


def test_roots_of_fig2_matrix_zero_the_determinant():
    m = build_coefficient_matrix(preset("fig2_theta_half_pi")).m
    for lam in poly_roots(char_poly(m)):
        assert abs(det(lam * np.eye(4) - m)) <= 1e-8


def test_linear_and_constant_polynomials():
    assert poly_roots([2, 4]) == [-0.5]
    with pytest.raises(ValueError):
        poly_roots([3])


def test_nonconvergence_carries_residuals():
    with pytest.raises(ConvergenceError) as info:
        poly_roots(Polynomial((1, 0, 0, 0, 0, 1)), max_iter=1)
    assert len(info.value.residuals) == 5


def test_horner_and_trailing_zero_strip():
    p = Polynomial((1, 2, 3, 0, 0))
    assert p.degree == 2
    assert p(2) == 1 + 4 + 12


@settings(max_examples=40, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), min_size=1, max_size=6),
       st.integers(0, 2**32 - 1))
def test_roots_stable_under_tiny_perturbation(roots, seed):
    # only well-separated root sets
    for i in range(len(roots)):
        for j in range(i):
            if abs(roots[i] - roots[j]) < 0.5:
                return
    coeffs = np.poly(roots)[::-1]
    eps = np.random.default_rng(seed).standard_normal(len(coeffs)) * 1e-15
    assert _set_distance(poly_roots(coeffs), poly_roots(coeffs + eps)) < 1e-9


# -- eigenvalues -------------------------------------------------------


def test_eigenvalues_diagonal():
    assert eigenvalues(np.diag([1 + 2j, 3])) == [1 + 2j, 3]


def test_eigenvalues_jordan_block():
    vals = eigenvalues([[0, 1], [0, 0]])
    assert all(abs(v) <= 1e-6 for v in vals)


def test_eigenvalues_defective_non_triangular():
    # similarity transform of a Jordan block: no triangular shortcut
    s = np.array([[1, 2], [3, 7]], dtype=complex)
    a = s @ np.array([[0.5, 1], [0, 0.5]]) @ np.linalg.inv(s)
    for v in eigenvalues(a):
        assert abs(v - 0.5) <= 1e-6


def test_eigenvalues_split_decoupled_blocks():
    # a 2x2 block with Re = 1 interleaved with two isolated entries equal to 1:
    # a single quartic would hold a triple-real-part cluster
    a = np.zeros((4, 4), dtype=complex)
    a[0, 0] = a[2, 2] = 1
    a[1, 1], a[3, 3] = 0.5, 1.5
    a[1, 3] = a[3, 1] = 1j
    vals = eigenvalues(a)
    assert vals.count(1) == 2
    assert _set_distance(vals, np.linalg.eigvals(a)) <= 1e-14


def test_eigenvalues_sorted_by_real_part():
    vals = eigenvalues(np.array([[3, 1], [1, -2]], dtype=complex))
    assert vals[0].real < vals[1].real


def test_eigenvalues_size_limit():
    with pytest.raises(ValueError):
        eigenvalues(np.eye(17) + np.ones((17, 17)))


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_trace_and_determinant_identities(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    vals = eigenvalues(a)
    scale = np.max(np.abs(a))
    assert abs(sum(vals) - np.trace(a)) <= 1e-8 * scale
    d = np.linalg.det(a)
    prod = np.prod(vals)
    assert abs(prod - d) <= 1e-6 * max(abs(d), 1e-300)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_eigenvalues_match_numpy(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    assert _set_distance(eigenvalues(a), np.linalg.eigvals(a)) < 1e-7 * max(1.0, np.max(np.abs(a)))


def test_rotation_eigenvalues_on_unit_circle():
    t = 0.3
    r = [[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]]
    vals = eigenvalues(r)
    assert all(abs(abs(v) - 1) < 1e-12 for v in vals)
    assert {round(cmath.phase(v), 12) for v in vals} == {round(-t, 12), round(t, 12)}
