import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bases import build_basis, decompose_penalty, difference_penalty, evaluate_basis
from utils.errors import DomainError, RankError, ValidationError


@given(
    num_basis=st.integers(min_value=4, max_value=40),
    points=st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=50),
)
def test_partition_of_unity(num_basis, points):
    basis = build_basis(0.0, 1.0, num_basis)
    matrix = evaluate_basis(basis, np.array(points))

    assert matrix.shape == (len(points), num_basis)
    assert np.all(matrix >= -1e-14)
    np.testing.assert_allclose(matrix.sum(axis=1), 1.0, atol=1e-10)


def test_knots_are_equally_spaced_with_boundary_multiplicity():
    basis = build_basis(-1.0, 3.0, num_basis=30, degree=3)

    assert basis.knots.size == 30 + 3 + 1
    np.testing.assert_allclose(basis.breakpoints, np.linspace(-1.0, 3.0, 28))
    assert np.all(basis.knots[:4] == -1.0)
    assert np.all(basis.knots[-4:] == 3.0)


def test_cubic_basis_reproduces_linear_functions():
    basis = build_basis(0.0, 2.0, num_basis=12)
    greville = np.array([
        basis.knots[j + 1:j + basis.degree + 1].mean() for j in range(basis.num_basis)
    ])
    grid = np.linspace(0.0, 2.0, 101)

    np.testing.assert_allclose(evaluate_basis(basis, grid) @ greville, grid, atol=1e-12)


def test_points_outside_domain_are_rejected():
    basis = build_basis(0.0, 1.0, 10)

    with pytest.raises(DomainError):
        evaluate_basis(basis, [0.5, 1.01])


def test_endpoint_within_tolerance_is_accepted():
    basis = build_basis(0.0, 1.0, 10)
    row = evaluate_basis(basis, [1.0 + 1e-12])

    assert row[0, -1] == pytest.approx(1.0)


@pytest.mark.parametrize("lo, hi, num_basis", [(1.0, 1.0, 10), (0.0, 1.0, 3), (2.0, 1.0, 10)])
def test_invalid_basis_arguments(lo, hi, num_basis):
    with pytest.raises(ValidationError):
        build_basis(lo, hi, num_basis)


@given(num_basis=st.integers(min_value=5, max_value=40), order=st.sampled_from([0, 1, 2]))
def test_penalty_rank_and_split(num_basis, order):
    penalty = difference_penalty(num_basis, order)
    decomposition = decompose_penalty(penalty, order)

    assert np.linalg.matrix_rank(penalty) == num_basis - order
    assert decomposition.q1.shape == (num_basis, num_basis - order)
    assert decomposition.q2.shape == (num_basis, order)
    assert np.all(decomposition.lambda1 > 0)
    assert np.all(np.diff(decomposition.lambda1) <= 1e-12)

    full = np.column_stack([decomposition.q1, decomposition.q2])
    np.testing.assert_allclose(full.T @ full, np.eye(num_basis), atol=1e-10)
    np.testing.assert_allclose(
        decomposition.q1 @ np.diag(decomposition.lambda1) @ decomposition.q1.T, penalty, atol=1e-9
    )


@pytest.mark.parametrize("order", [1, 2])
def test_unpenalized_space_holds_low_degree_polynomials(order):
    decomposition = decompose_penalty(difference_penalty(20, order), order)
    differences = np.diff(np.eye(20), order, axis=0)

    np.testing.assert_allclose(differences @ decomposition.q2, 0.0, atol=1e-10)

    ramp = np.linspace(0.0, 1.0, 20)
    assert ramp @ difference_penalty(20, 2) @ ramp == pytest.approx(0.0, abs=1e-12)


def test_ridge_penalty_decomposition():
    decomposition = decompose_penalty(difference_penalty(15, 0), 0)

    np.testing.assert_allclose(decomposition.q1 @ decomposition.q1.T, np.eye(15), atol=1e-12)
    np.testing.assert_allclose(decomposition.lambda1, 1.0)
    assert decomposition.q2.shape == (15, 0)


def test_eigenvector_signs_are_fixed():
    decomposition = decompose_penalty(difference_penalty(12, 2), 2)
    vectors = np.column_stack([decomposition.q1, decomposition.q2])
    largest = vectors[np.argmax(np.abs(vectors), axis=0), np.arange(12)]

    assert np.all(largest > 0)


def test_split_and_combine_are_inverse():
    decomposition = decompose_penalty(difference_penalty(10, 2), 2)
    coefficients = np.arange(10.0) ** 2

    u_star, beta_star = decomposition.split(coefficients)
    np.testing.assert_allclose(decomposition.combine(u_star, beta_star), coefficients, atol=1e-10)


def test_rank_mismatch_raises():
    with pytest.raises(RankError):
        decompose_penalty(difference_penalty(10, 2), 1)


@pytest.mark.parametrize("num_basis, order", [(10, 3), (2, 2)])
def test_unsupported_penalty(num_basis, order):
    with pytest.raises(ValidationError):
        difference_penalty(num_basis, order)
