"""
Functional principal component estimation.
Mean curve, smoothed covariance with noise split, quadrature eigendecomposition and
subject scores (quadrature for dense subjects, BLUP for sparse ones).
"""
import logging
from typing import Tuple

import numpy as np
from scipy import linalg

from fpca.dataset import FunctionalDataset
from fpca.smoothing import smooth_curve, smooth_surface
from utils.errors import DomainError, ValidationError
from utils.numerics import sign_fix_columns, trapezoid_weights

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-8
POSITIVE_EIGENVALUE_TOL = 1e-10


def estimate_mean(data: FunctionalDataset, pre_centered: bool = False) -> np.ndarray:
    """
    Estimate the smooth mean curve on the common grid.

    Args:
        data: Functional dataset
        pre_centered: Assert the curves have zero mean and skip estimation

    Returns:
        np.ndarray: Mean curve on data.common_grid

    Raises:
        DomainError: If unobserved grid points lie outside the observed range
    """
    if pre_centered:
        logger.debug("Pre-centered data, mean fixed at zero")
        return np.zeros(data.m)

    observed = data.observed_matrix()
    counts = np.sum(~np.isnan(observed), axis=0)
    covered = np.flatnonzero(counts > 0)

    gaps = np.flatnonzero(counts == 0)
    outside = gaps[(gaps < covered[0]) | (gaps > covered[-1])]
    if outside.size:
        raise DomainError(
            f"Grid coverage gap: {outside.size} grid point(s) never observed outside "
            f"[{data.common_grid[covered[0]]}, {data.common_grid[covered[-1]]}]"
        )

    pointwise = np.zeros(data.m)
    pointwise[covered] = np.nansum(observed[:, covered], axis=0) / counts[covered]

    return smooth_curve(data.common_grid, pointwise, counts.astype(float))


def raw_covariance(data: FunctionalDataset, mu: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Pooled raw covariance of centered observations.

    Entry (j, k) averages r_ij * r_ik over subjects observing both points.

    Returns:
        Tuple[np.ndarray, np.ndarray]: (raw m x m covariance, m x m pair counts)
    """
    residuals = data.observed_matrix() - np.asarray(mu, dtype=float)[None, :]
    mask = (~np.isnan(residuals)).astype(float)
    filled = np.nan_to_num(residuals)

    products = filled.T @ filled
    counts = mask.T @ mask
    raw = np.divide(products, counts, out=np.zeros_like(products), where=counts > 0)
    return raw, counts


def estimate_covariance(data: FunctionalDataset, mu: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    Smoothed covariance surface and measurement-error variance.

    The surface is smoothed from off-diagonal raw entries only, so the diagonal keeps
    the noise; sigma2_X averages raw minus smoothed diagonal, floored at zero.

    Args:
        data: Functional dataset
        mu: Mean curve on the common grid

    Returns:
        Tuple[np.ndarray, float]: (symmetric m x m covariance, sigma2_X)
    """
    if data.n < 2:
        raise ValidationError("Covariance estimation needs at least two subjects")

    raw, counts = raw_covariance(data, mu)

    weights = counts.copy()
    np.fill_diagonal(weights, 0.0)
    off_diagonal_cells = int(np.sum(weights > 0))
    if off_diagonal_cells < data.m:
        raise ValidationError(
            f"Only {off_diagonal_cells} off-diagonal covariance cells observed; "
            f"need at least {data.m}"
        )

    smoothed, log_lambda = smooth_surface(data.common_grid, raw, weights)
    smoothed = (smoothed + smoothed.T) / 2.0

    diagonal_seen = np.diag(counts) > 0
    excess = np.diag(raw)[diagonal_seen] - np.diag(smoothed)[diagonal_seen]
    noise_var = max(0.0, float(np.mean(excess)))

    logger.debug(f"Covariance smoothed (log10 lambda {log_lambda:.2f}), sigma2_X = {noise_var:.4g}")
    return smoothed, noise_var


def eigen_decompose(cov: np.ndarray, grid: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigendecomposition of the covariance operator under trapezoidal quadrature.

    Solves C W psi = lambda psi through the symmetric form W^1/2 C W^1/2 and keeps only
    strictly positive eigenvalues.

    Returns:
        Tuple[np.ndarray, np.ndarray]: (decreasing eigenvalues, m x K eigenfunctions with
        quadrature norm one and largest-magnitude entry positive)
    """
    cov = np.asarray(cov, dtype=float)
    grid = np.asarray(grid, dtype=float)

    if cov.shape != (grid.size, grid.size):
        raise ValidationError(f"Covariance shape {cov.shape} does not match grid of {grid.size}")

    scale = max(float(np.max(np.abs(cov))), 1.0)
    if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL * scale:
        raise ValidationError("Covariance matrix is not symmetric")

    root = np.sqrt(trapezoid_weights(grid))
    values, vectors = linalg.eigh(root[:, None] * cov * root[None, :])

    order = np.argsort(-values, kind='stable')
    values = values[order]
    vectors = vectors[:, order]

    keep = values > POSITIVE_EIGENVALUE_TOL * max(float(values[0]), 0.0)
    keep &= values > 0
    values = values[keep]
    functions = vectors[:, keep] / root[:, None]

    return values, sign_fix_columns(functions)


def quadrature_scores(
    data: FunctionalDataset,
    mu: np.ndarray,
    eigenfunctions: np.ndarray,
) -> np.ndarray:
    """Integrate (X_i - mu) psi_k with the trapezoidal rule; dense subjects only."""
    weights = trapezoid_weights(data.common_grid)
    centered = data.observed_matrix() - np.asarray(mu)[None, :]
    if np.any(np.isnan(centered)):
        raise ValidationError("Quadrature scores need fully observed curves")
    return centered @ (weights[:, None] * eigenfunctions)


def blup_scores(
    values: np.ndarray,
    mu: np.ndarray,
    eigenvalues: np.ndarray,
    eigenfunctions: np.ndarray,
    noise_var: float,
) -> np.ndarray:
    """
    Best linear unbiased prediction of one subject's scores.

    Computes Lambda Psi' (Psi Lambda Psi' + s2 I)^-1 (x - mu) in the equivalent K x K form
    (Psi'Psi + s2 Lambda^-1)^-1 Psi'(x - mu).

    Args:
        values: Observations at the subject's grid points
        mu: Mean at those points
        eigenvalues: K eigenvalues
        eigenfunctions: Eigenfunctions at those points, m_i x K
        noise_var: Measurement-error variance

    Raises:
        ValidationError: If the subject system is singular
    """
    psi = np.asarray(eigenfunctions, dtype=float)
    system = psi.T @ psi + noise_var * np.diag(1.0 / np.asarray(eigenvalues, dtype=float))
    rhs = psi.T @ (np.asarray(values, dtype=float) - np.asarray(mu, dtype=float))

    if np.linalg.matrix_rank(system) < system.shape[0]:
        raise ValidationError(
            f"Singular score system with {psi.shape[0]} points and {psi.shape[1]} components"
        )

    return linalg.solve(system, rhs, assume_a='pos')


def estimate_scores(
    data: FunctionalDataset,
    mu: np.ndarray,
    eigenvalues: np.ndarray,
    eigenfunctions: np.ndarray,
    noise_var: float,
    num_components: int,
) -> np.ndarray:
    """
    Estimate subject scores on the leading num_components eigenfunctions.

    Fully observed subjects use quadrature; others use BLUP from their own points.

    Returns:
        np.ndarray: n x num_components score matrix
    """
    if num_components > len(eigenvalues):
        raise ValidationError(
            f"Requested {num_components} components but only {len(eigenvalues)} retained"
        )

    lam = np.asarray(eigenvalues[:num_components], dtype=float)
    psi = np.asarray(eigenfunctions[:, :num_components], dtype=float)
    weights = trapezoid_weights(data.common_grid)
    mu = np.asarray(mu, dtype=float)

    scores = np.zeros((data.n, num_components))
    sparse = 0
    for i, subject in enumerate(data.subjects):
        index = data.indices(i)
        if data.is_dense(i):
            centered = np.empty(data.m)
            centered[index] = subject.values - mu[index]
            scores[i] = centered @ (weights[:, None] * psi)
        else:
            sparse += 1
            scores[i] = blup_scores(subject.values, mu[index], lam, psi[index], noise_var)

    logger.debug(f"Scores: {data.n - sparse} quadrature, {sparse} BLUP subjects")
    return scores
