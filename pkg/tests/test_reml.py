import numpy as np
import pytest

from glmm import WorkingLmm, reml_profile
from utils.errors import ConvergenceError, RankError, ValidationError


def random_instance(seed, n=None, p=None, k=None, sigma_u=0.5):
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(30, 200))
    p = p or int(rng.integers(1, 4))
    k = k or int(rng.integers(3, 15))
    X = np.column_stack([np.ones(n), rng.normal(size=(n, p - 1))])
    Z = rng.normal(size=(n, k))
    y = X @ rng.normal(size=p) + Z @ rng.normal(0.0, sigma_u, k) + rng.normal(size=n)
    return y, X, Z


def dense_rel(y, X, Z, lam):
    n, p = X.shape
    V = np.eye(n) + lam * Z @ Z.T
    V_inv = np.linalg.inv(V)
    xtvx = X.T @ V_inv @ X
    projector = V_inv - V_inv @ X @ np.linalg.solve(xtvx, X.T @ V_inv)
    return -0.5 * (
        np.linalg.slogdet(V)[1] + np.linalg.slogdet(xtvx)[1] + (n - p) * np.log(y @ projector @ y)
    )


@pytest.mark.parametrize("seed", range(10))
def test_spectral_rel_matches_dense_evaluation(seed):
    y, X, Z = random_instance(seed)
    lmm = WorkingLmm(y, X, Z)

    for lam in (0.0, 1e-3, 0.7, 25.0):
        assert lmm.rel(lam) == pytest.approx(dense_rel(y, X, Z, lam), abs=1e-8)


@pytest.mark.parametrize("seed", range(50))
def test_optimum_is_at_least_the_grid_scan_maximum(seed):
    y, X, Z = random_instance(100 + seed)
    lmm = WorkingLmm(y, X, Z)
    profile = lmm.fit()

    log_grid = np.linspace(-8.0, 8.0, 2001)
    scan = lmm.rel(np.concatenate([[0.0], np.power(10.0, log_grid)]))

    # grid spacing is 0.008 in log10 lambda, so the optimizer may beat the scan
    assert profile.rel_at_opt >= scan.max() - 1e-10

    best = int(np.argmax(scan))
    if best > 0:
        lo, hi = log_grid[max(best - 2, 0)], log_grid[min(best, log_grid.size - 1)]
        fine = lmm.rel(np.power(10.0, np.linspace(lo, hi, 2001)))
        assert abs(profile.rel_at_opt - max(fine.max(), scan.max())) < 1e-6
    assert profile.rel_at_opt == pytest.approx(float(lmm.rel(profile.lambda_hat)), abs=1e-12)
    assert profile.rel_at_zero == pytest.approx(float(lmm.rel(0.0)), abs=1e-12)


def test_effects_match_generalized_least_squares():
    y, X, Z = random_instance(7, n=80, p=2, k=6, sigma_u=1.0)
    profile = reml_profile(y, X, Z)
    lam = profile.lambda_hat
    assert lam > 0

    V_inv = np.linalg.inv(np.eye(80) + lam * Z @ Z.T)
    beta = np.linalg.solve(X.T @ V_inv @ X, X.T @ V_inv @ y)
    u = lam * Z.T @ V_inv @ (y - X @ beta)

    np.testing.assert_allclose(profile.beta, beta, atol=1e-8)
    np.testing.assert_allclose(profile.u, u, atol=1e-8)
    assert profile.sigma2_u == pytest.approx(lam * profile.sigma2_e)


def test_fixed_lambda_is_evaluated_not_optimized():
    y, X, Z = random_instance(3, n=60, p=1, k=5)
    profile = reml_profile(y, X, Z, lambda_fixed=0.0)

    assert profile.lambda_hat == 0.0
    assert profile.rel_at_opt == profile.rel_at_zero
    np.testing.assert_array_equal(profile.u, 0.0)
    residual = y - X @ profile.beta
    assert profile.sigma2_e == pytest.approx(residual @ residual / 59)


def test_null_eigenvalues_are_those_of_the_projected_design():
    y, X, Z = random_instance(4, n=50, p=2, k=4)
    projector = np.eye(50) - X @ np.linalg.solve(X.T @ X, X.T)
    expected = np.sort(np.linalg.eigvalsh(Z.T @ projector @ Z))[::-1]

    np.testing.assert_allclose(WorkingLmm(y, X, Z).null_eigenvalues, expected, rtol=1e-10)


def test_empty_random_design_gives_zero_lambda():
    y, X, _ = random_instance(5, n=40, p=1, k=3)
    profile = reml_profile(y, X, np.zeros((40, 0)))

    assert profile.lambda_hat == 0.0
    assert profile.u.size == 0


def test_rank_deficient_fixed_design():
    y, X, Z = random_instance(6, n=40, p=2, k=3)
    with pytest.raises(RankError):
        WorkingLmm(y, np.column_stack([X, X[:, 1]]), Z)


def test_too_few_observations():
    with pytest.raises(ValidationError):
        WorkingLmm(np.ones(2), np.ones((2, 2)) + np.eye(2), np.ones((2, 1)))


def test_exactly_fitted_responses_are_flagged():
    _, X, Z = random_instance(8, n=50, p=2, k=5)
    lmm = WorkingLmm(X @ np.array([1.0, -2.0]), X, Z)

    assert lmm.exact_fit
    assert lmm.null_eigenvalues.size == 5
    np.testing.assert_allclose(lmm.exact_profile().beta, [1.0, -2.0], atol=1e-10)
    with pytest.raises(ConvergenceError):
        lmm.fit()
