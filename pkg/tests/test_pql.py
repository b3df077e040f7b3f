import numpy as np
import pytest

from bases import decompose_penalty, difference_penalty
from design import build_design
from glmm import get_family, pql_fit, reml_profile, working_response


def make_design(seed, n=100, order=1, num_basis=12, kx=4):
    rng = np.random.default_rng(seed)
    scores = rng.normal(size=(n, kx)) * np.sqrt([1.0, 0.5, 0.25, 0.125][:kx])
    J = rng.normal(0.0, 0.3, size=(kx, num_basis))
    penalty = decompose_penalty(difference_penalty(num_basis, order), order)
    return build_design(scores, J, penalty), rng


@pytest.mark.parametrize("seed", range(20))
def test_gaussian_pql_is_a_single_reml_fit(seed):
    design, rng = make_design(seed)
    y = design.X @ np.array([0.5, 1.0]) + rng.normal(size=design.n)

    fit = pql_fit(design, y, get_family("gaussian"))
    direct = reml_profile(y, design.X, design.Z)

    assert fit.converged
    assert fit.iterations == 1
    assert fit.lambda_hat == pytest.approx(direct.lambda_hat, abs=1e-8)
    assert fit.sigma2_e == pytest.approx(direct.sigma2_e, abs=1e-8)
    np.testing.assert_allclose(fit.beta_hat, direct.beta, atol=1e-8)


def test_working_response_formula():
    family = get_family("poisson")
    y = np.array([0.0, 3.0, 7.0])
    eta = np.array([0.1, 1.0, 2.0])

    y_work, weights = working_response(y, eta, family)
    mu = np.exp(eta)

    np.testing.assert_allclose(weights, mu)
    np.testing.assert_allclose(y_work, np.sqrt(mu) * (eta + (y - mu) / mu))


def test_bernoulli_fit_converges():
    design, rng = make_design(21, n=200)
    eta = design.X @ np.array([0.2, 0.8])
    y = rng.binomial(1, 1.0 / (1.0 + np.exp(-eta))).astype(float)

    fit = pql_fit(design, y, get_family("bernoulli"))

    assert fit.converged
    assert 1 < fit.iterations < 50
    assert np.all(np.isfinite(fit.eta))
    assert fit.y_work.shape == (200,)
    assert fit.null_eigenvalues.size <= design.Z.shape[1]


def test_poisson_null_fit_keeps_lambda_at_zero():
    design, rng = make_design(22, n=150, order=2)
    y = rng.poisson(np.exp(0.3 + design.X[:, 1] * 0.2)).astype(float)

    fit = pql_fit(design, y, get_family("poisson"), lambda_fixed=0.0)

    assert fit.converged
    assert fit.lambda_hat == 0.0
    assert fit.rel_at_opt == fit.rel_at_zero
    np.testing.assert_array_equal(fit.u_hat, 0.0)


def test_iteration_cap_flags_nonconvergence():
    design, rng = make_design(23, n=120)
    y = rng.binomial(1, 0.5, size=120).astype(float)

    fit = pql_fit(design, y, get_family("bernoulli"), max_iter=1, tol=1e-12)

    assert not fit.converged
    assert fit.iterations == 1


def test_bernoulli_working_response_at_zero():
    y = np.array([0.0, 1.0, 1.0, 0.0])

    y_work, weights = working_response(y, np.zeros(4), get_family("bernoulli"))

    np.testing.assert_allclose(weights, 0.25)
    np.testing.assert_allclose(y_work / np.sqrt(weights), 2.0 * y - 1.0)


def test_gaussian_working_response_is_the_response():
    rng = np.random.default_rng(3)
    y = rng.normal(size=10)

    y_work, weights = working_response(y, rng.normal(size=10), get_family("gaussian"))

    np.testing.assert_allclose(y_work, y, atol=1e-12)
    np.testing.assert_array_equal(weights, 1.0)


@pytest.mark.parametrize("order", [0, 1, 2])
@pytest.mark.parametrize("value", [0.0, 1.0])
def test_constant_binary_responses_are_flagged_as_separation(order, value):
    design, _ = make_design(24, n=100, order=order)

    fit = pql_fit(design, np.full(100, value), get_family("bernoulli"))

    assert not fit.converged
    assert np.all(np.isfinite(fit.eta))
    assert fit.lambda_hat == 0.0
    assert fit.rel_at_opt == fit.rel_at_zero
    np.testing.assert_array_equal(fit.u_hat, 0.0)
    assert fit.null_eigenvalues.size > 0


def test_binomial_responses_at_the_trial_count_are_flagged():
    design, _ = make_design(25, n=80)
    trials = np.full(80, 10.0)

    fit = pql_fit(design, trials.copy(), get_family("binomial", trials=trials))

    assert not fit.converged
    assert fit.rel_at_opt == fit.rel_at_zero
