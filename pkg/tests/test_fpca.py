import numpy as np
import pytest

from fpca import (
    FunctionalDataset,
    Subject,
    blup_scores,
    eigen_decompose,
    estimate_covariance,
    estimate_mean,
    fit_fpca,
    select_kx,
)
from harness import SimConfig, fourier_eigenfunctions, generate_dataset
from utils.errors import DomainError, ValidationError
from utils.numerics import trapezoid_weights

GRID = np.linspace(0.0, 1.0, 50)


def rank_one_curves(n, noise_sd, seed):
    rng = np.random.default_rng(seed)
    scores = rng.normal(0.0, np.sqrt(2.0), n)
    shape = np.sqrt(2.0) * np.sin(2.0 * np.pi * GRID)
    curves = scores[:, None] * shape[None, :] + rng.normal(0.0, noise_sd, (n, GRID.size))
    return curves, scores, shape


def test_dataset_rejects_points_off_the_grid():
    subjects = [Subject("a", np.array([0.0, 0.55]), np.array([1.0, 2.0]))]
    with pytest.raises(DomainError):
        FunctionalDataset(subjects, np.linspace(0.0, 1.0, 11), np.array([0.0]))


def test_dataset_rejects_duplicate_points():
    subjects = [Subject("a", np.array([0.1, 0.1]), np.array([1.0, 2.0]))]
    with pytest.raises(ValidationError):
        FunctionalDataset(subjects, np.linspace(0.0, 1.0, 11), np.array([0.0]))


def test_dataset_checks_responses():
    curves = np.zeros((3, GRID.size))
    with pytest.raises(ValidationError):
        FunctionalDataset.from_dense(curves, GRID, [0.0, 1.0])
    with pytest.raises(ValidationError):
        FunctionalDataset.from_dense(curves, GRID, [0.0, 1.0, 0.5], family="bernoulli")
    with pytest.raises(ValidationError):
        FunctionalDataset.from_dense(curves, GRID, [0.0, 1.0, 2.0], family="binomial")


def test_from_dense_treats_nan_as_unobserved():
    curves = np.ones((2, GRID.size))
    curves[1, ::2] = np.nan
    data = FunctionalDataset.from_dense(curves, GRID, [0.0, 1.0])

    assert data.ids == ["s0001", "s0002"]
    assert data.is_dense(0)
    assert not data.is_dense(1)
    assert data.total_observations == GRID.size + GRID.size // 2
    assert np.isnan(data.observed_matrix()[1, 0])


def test_rank_one_spectrum_is_recovered():
    curves, scores, shape = rank_one_curves(200, 0.0, seed=1)
    data = FunctionalDataset.from_dense(curves, GRID, np.zeros(200))
    model = fit_fpca(data, kx=1)

    expected = np.var(scores)
    assert model.eigenvalues[0] == pytest.approx(expected, rel=0.05)
    alignment = abs(np.sum(trapezoid_weights(GRID) * model.eigenfunctions[:, 0] * shape))
    assert alignment > 0.99


def test_noise_variance_is_separated_from_the_signal():
    curves, _, _ = rank_one_curves(300, np.sqrt(0.1), seed=2)
    data = FunctionalDataset.from_dense(curves, GRID, np.zeros(300))
    mu = estimate_mean(data)
    _, noise_var = estimate_covariance(data, mu)

    assert 0.07 < noise_var < 0.13


def test_pure_noise_goes_to_the_noise_variance():
    curves = np.random.default_rng(5).normal(0.0, 1.0, (200, GRID.size))
    data = FunctionalDataset.from_dense(curves, GRID, np.zeros(200))
    mu = estimate_mean(data)
    cov, noise_var = estimate_covariance(data, mu)
    eigenvalues, _ = eigen_decompose(cov, GRID)

    assert 0.8 <= noise_var <= 1.2
    assert np.all(eigenvalues < 0.2)


def test_pre_centered_mean_is_zero():
    curves, _, _ = rank_one_curves(40, 0.1, seed=3)
    data = FunctionalDataset.from_dense(curves, GRID, np.zeros(40))
    model = fit_fpca(data, pre_centered=True, kx=1)

    assert np.all(model.mean == 0.0)


def test_mean_rejects_unobserved_edges():
    curves = np.ones((5, GRID.size))
    curves[:, -3:] = np.nan
    data = FunctionalDataset(
        [Subject(f"s{i}", GRID[:-3], curves[i, :-3]) for i in range(5)], GRID, np.zeros(5)
    )

    with pytest.raises(DomainError):
        estimate_mean(data)


def test_eigen_decompose_recovers_a_known_operator():
    grid = np.linspace(0.0, 1.0, 81)
    values = np.array([1.0, 0.5, 0.25, 0.125, 0.0625])
    psi = fourier_eigenfunctions(grid, values.size)
    cov = psi @ np.diag(values) @ psi.T

    eigenvalues, eigenfunctions = eigen_decompose(cov, grid)

    np.testing.assert_allclose(eigenvalues[:5], values, rtol=1e-8)
    gram = eigenfunctions.T @ (trapezoid_weights(grid)[:, None] * eigenfunctions)
    np.testing.assert_allclose(gram, np.eye(gram.shape[0]), atol=1e-8)


def test_eigen_decompose_rejects_asymmetric_input():
    cov = np.eye(GRID.size)
    cov[0, 1] = 1.0
    with pytest.raises(ValidationError):
        eigen_decompose(cov, GRID)


def test_blup_recovers_exact_scores_without_noise():
    psi = fourier_eigenfunctions(GRID, 3)[::7]
    xi = np.array([0.7, -1.2, 0.3])
    values = psi @ xi + 2.0

    scores = blup_scores(values, np.full(values.size, 2.0), np.array([1.0, 0.5, 0.25]), psi, 0.0)

    np.testing.assert_allclose(scores, xi, atol=1e-10)


def test_blup_with_too_few_points_is_singular():
    psi = fourier_eigenfunctions(GRID, 3)[:1]
    with pytest.raises(ValidationError):
        blup_scores(np.array([1.0]), np.zeros(1), np.ones(3), psi, 0.0)


def test_blup_shrinks_towards_zero_with_noise():
    psi = fourier_eigenfunctions(GRID, 2)[::10]
    xi = np.array([1.0, -1.0])
    values = psi @ xi

    exact = blup_scores(values, np.zeros(values.size), np.ones(2), psi, 0.0)
    shrunk = blup_scores(values, np.zeros(values.size), np.ones(2), psi, 1.0)

    assert np.linalg.norm(shrunk) < np.linalg.norm(exact)


def test_kx_floor_and_override(gaussian_null_data):
    selected = fit_fpca(gaussian_null_data, d_max=2)
    assert selected.kx >= 3
    assert not selected.kx_forced

    forced = fit_fpca(gaussian_null_data, d_max=2, kx=5)
    assert forced.kx == 5
    assert forced.kx_forced
    assert forced.scores.shape == (gaussian_null_data.n, 5)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_aic_finds_the_five_generating_components(seed):
    data = generate_dataset(SimConfig(n=100), seed=seed)

    assert fit_fpca(data).kx == 5


def test_aic_keeps_one_dominant_component():
    curves, _, _ = rank_one_curves(200, 0.1, seed=4)
    data = FunctionalDataset.from_dense(curves, GRID, np.zeros(200))

    assert fit_fpca(data).kx == 1


def test_forced_kx_below_floor_is_rejected(gaussian_null_data):
    with pytest.raises(ValidationError, match="K_x must be at least d\\+1 = 3"):
        fit_fpca(gaussian_null_data, d_max=2, kx=2)


def test_select_kx_needs_enough_eigenvalues(gaussian_null_data):
    raw_variance = np.ones(gaussian_null_data.m)
    psi = fourier_eigenfunctions(gaussian_null_data.common_grid, 3)
    eigenvalues = np.array([1.0, 0.5, 1e-12])

    assert select_kx(gaussian_null_data, raw_variance, eigenvalues, psi, d_max=2) == 3
    with pytest.raises(ValidationError, match="K_x must be at least d\\+1 = 3"):
        select_kx(gaussian_null_data, raw_variance, eigenvalues[:2], psi[:, :2], d_max=2)


def test_sparse_subjects_get_blup_scores(sparse_data):
    model = fit_fpca(sparse_data, d_max=2)

    assert model.scores.shape == (sparse_data.n, model.kx)
    assert np.all(np.isfinite(model.scores))
    assert model.noise_var >= 0.0


def test_subject_order_does_not_change_the_fit(gaussian_null_data):
    order = np.random.default_rng(5).permutation(gaussian_null_data.n)
    permuted = FunctionalDataset(
        [gaussian_null_data.subjects[i] for i in order],
        gaussian_null_data.common_grid,
        gaussian_null_data.responses[order],
    )

    original = fit_fpca(gaussian_null_data, kx=3)
    shuffled = fit_fpca(permuted, kx=3)

    np.testing.assert_allclose(shuffled.eigenvalues[:3], original.eigenvalues[:3], rtol=1e-8)
    np.testing.assert_allclose(shuffled.scores, original.scores[order], atol=1e-8)
