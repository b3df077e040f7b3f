import numpy as np
import pytest
from scipy import integrate

from bases import build_basis, decompose_penalty, difference_penalty, evaluate_basis
from design import Hypothesis, Method, build_design, coefficient_from_effects, compute_J
from harness import fourier_eigenfunctions
from utils.errors import DomainError, ValidationError


def fourier(t, k):
    return fourier_eigenfunctions(np.atleast_1d(t), k + 1)[:, k]


def test_J_matches_an_explicit_trapezoid_loop():
    grid = np.linspace(0.0, 1.0, 37)
    psi = fourier_eigenfunctions(grid, 4)
    basis = build_basis(0.0, 1.0, 12)
    splines = evaluate_basis(basis, grid)

    expected = np.zeros((4, 12))
    for k in range(4):
        for l in range(12):
            f = psi[:, k] * splines[:, l]
            expected[k, l] = sum(
                (grid[j + 1] - grid[j]) * (f[j] + f[j + 1]) / 2.0 for j in range(grid.size - 1)
            )

    np.testing.assert_allclose(compute_J(psi, basis, grid), expected, atol=1e-14)


def test_J_on_a_fine_grid_matches_the_integral():
    grid = np.linspace(0.0, 1.0, 10001)
    basis = build_basis(0.0, 1.0, 10)
    J = compute_J(fourier_eigenfunctions(grid, 3), basis, grid)

    exact = np.zeros_like(J)
    for k in range(3):
        for l in range(10):
            exact[k, l] = integrate.quad(
                lambda t: fourier(t, k)[0] * evaluate_basis(basis, [t])[0, l],
                0.0, 1.0, points=basis.breakpoints[1:-1], limit=200,
            )[0]

    assert np.max(np.abs(J - exact)) < 1e-6 * np.max(np.abs(exact))


def test_refined_quadrature_converges():
    coarse = np.linspace(0.0, 1.0, 41)
    fine = np.linspace(0.0, 1.0, 4001)
    basis = build_basis(0.0, 1.0, 15)

    reference = compute_J(fourier_eigenfunctions(fine, 2)[:, :1], basis, fine)
    plain = compute_J(fourier_eigenfunctions(coarse, 2)[:, :1], basis, coarse)
    refined = compute_J(fourier_eigenfunctions(coarse, 2)[:, :1], basis, coarse, refine=10)

    assert np.max(np.abs(refined - reference)) < np.max(np.abs(plain - reference))


def test_J_rejects_mismatched_domain():
    grid = np.linspace(0.0, 0.9, 20)
    with pytest.raises(DomainError):
        compute_J(np.ones((20, 1)), build_basis(0.0, 1.0, 10), grid)


@pytest.mark.parametrize("hypothesis", list(Hypothesis))
def test_design_shapes(hypothesis, rng):
    order = hypothesis.order
    penalty = decompose_penalty(difference_penalty(30, order), order)
    scores = rng.normal(size=(40, 5))
    J = rng.normal(size=(5, 30))

    design = build_design(scores, J, penalty)

    assert design.hypothesis == hypothesis
    assert design.X.shape == (40, 1 + order)
    assert design.Z.shape == (40, 30 - order)
    np.testing.assert_array_equal(design.X[:, 0], 1.0)


@pytest.mark.parametrize("order", [0, 1, 2])
def test_design_reproduces_the_linear_predictor(order, rng):
    penalty = decompose_penalty(difference_penalty(20, order), order)
    scores = rng.normal(size=(25, 4))
    J = rng.normal(size=(4, 20))
    coefficients = rng.normal(size=20)

    design = build_design(scores, J, penalty)
    u_star, beta_star = penalty.split(coefficients)
    u = np.sqrt(penalty.lambda1) * u_star

    np.testing.assert_allclose(
        design.X[:, 1:] @ beta_star + design.Z @ u, scores @ J @ coefficients, atol=1e-10
    )


def test_coefficient_from_effects_evaluates_the_spline():
    basis = build_basis(0.0, 1.0, 20)
    penalty = decompose_penalty(difference_penalty(20, 2), 2)
    grid = np.linspace(0.0, 1.0, 33)
    coefficients = np.sin(np.linspace(0.0, 3.0, 20))

    u_star, beta_star = penalty.split(coefficients)
    beta = coefficient_from_effects(penalty, basis, beta_star, u_star, grid)

    np.testing.assert_allclose(beta, evaluate_basis(basis, grid) @ coefficients, atol=1e-10)


def test_coefficient_from_effects_checks_shapes():
    basis = build_basis(0.0, 1.0, 20)
    penalty = decompose_penalty(difference_penalty(20, 1), 1)
    with pytest.raises(ValidationError):
        coefficient_from_effects(penalty, basis, np.zeros(2), np.zeros(19), [0.5])


def test_build_design_checks_shapes(rng):
    penalty = decompose_penalty(difference_penalty(10, 1), 1)
    with pytest.raises(ValidationError):
        build_design(rng.normal(size=(5, 3)), rng.normal(size=(4, 10)), penalty)


def test_hypothesis_and_method_parsing():
    assert Hypothesis.parse("Linearity") is Hypothesis.LINEARITY
    assert Hypothesis.from_order(1) is Hypothesis.FUNCTIONALITY
    assert Method.parse("arlrt") is Method.RLRT
    assert Method.parse("ASCORE") is Method.SCORE
    assert Method.parse("score") is Method.SCORE
    assert Method.parse(" RLRT ") is Method.RLRT
    with pytest.raises(ValidationError):
        Hypothesis.parse("curvature")
    with pytest.raises(ValidationError):
        Method.parse("wald")
