"""
Penalized B-spline smoothers for the mean curve and the covariance surface.
Second-order difference penalties, smoothing parameter chosen by generalized
cross-validation over a fixed log grid.
"""
import logging
from typing import Tuple

import numpy as np
from scipy import linalg

from bases import build_basis, difference_penalty, evaluate_basis

logger = logging.getLogger(__name__)

MEAN_NUM_BASIS = 20
COVARIANCE_NUM_BASIS = 10
SMOOTHING_LOG10_GRID = np.linspace(-6.0, 6.0, 49)
SPLINE_DEGREE = 3


def _basis_matrix(grid: np.ndarray, num_basis: int) -> np.ndarray:
    num_basis = max(SPLINE_DEGREE + 1, min(num_basis, grid.size))
    basis = build_basis(grid[0], grid[-1], num_basis, SPLINE_DEGREE)
    return evaluate_basis(basis, grid)


def _normalize_weights(weights: np.ndarray) -> np.ndarray:
    weights = np.asarray(weights, dtype=float)
    positive = weights[weights > 0]
    if positive.size == 0:
        return weights
    return weights / positive.mean()


def _solve(system: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return linalg.solve(system, rhs, assume_a='sym')
    except (linalg.LinAlgError, ValueError):
        return np.linalg.lstsq(system, rhs, rcond=None)[0]


def _gcv_select(gram: np.ndarray, rhs: np.ndarray, penalty: np.ndarray, rss_of, n_eff: int):
    """Return coefficients minimizing GCV over the smoothing grid."""
    best = None
    for log_lambda in SMOOTHING_LOG10_GRID:
        system = gram + (10.0 ** log_lambda) * penalty
        coef = _solve(system, rhs)
        edf = float(np.trace(_solve(system, gram)))
        dof = n_eff - edf
        if dof <= 0:
            continue

        gcv = n_eff * rss_of(coef) / dof ** 2
        if best is None or gcv < best[0] - 1e-14 * max(abs(best[0]), 1.0):
            best = (gcv, log_lambda, coef)

    if best is None:
        logger.warning("GCV had no admissible smoothing parameter, using the largest")
        system = gram + (10.0 ** SMOOTHING_LOG10_GRID[-1]) * penalty
        return _solve(system, rhs), float(SMOOTHING_LOG10_GRID[-1])

    logger.debug(f"GCV selected log10(lambda) = {best[1]:.2f}")
    return best[2], float(best[1])


def smooth_curve(
    grid: np.ndarray,
    values: np.ndarray,
    weights: np.ndarray,
    num_basis: int = MEAN_NUM_BASIS,
) -> np.ndarray:
    """
    Weighted P-spline smooth of pointwise values on a grid.

    Points with zero weight are ignored by the fit but receive fitted values.

    Args:
        grid: Increasing grid
        values: Values on the grid (ignored where weight is zero)
        weights: Nonnegative weights (e.g. observation counts)
        num_basis: Number of B-spline functions

    Returns:
        np.ndarray: Smoothed values on the grid
    """
    grid = np.asarray(grid, dtype=float)
    weights = _normalize_weights(weights)
    values = np.where(weights > 0, np.nan_to_num(np.asarray(values, dtype=float)), 0.0)

    design = _basis_matrix(grid, num_basis)
    penalty = difference_penalty(design.shape[1], 2)
    gram = design.T @ (weights[:, None] * design)
    rhs = design.T @ (weights * values)

    def rss_of(coef):
        return float(np.sum(weights * (values - design @ coef) ** 2))

    coef, _ = _gcv_select(gram, rhs, penalty, rss_of, int(np.sum(weights > 0)))
    return design @ coef


def smooth_surface(
    grid: np.ndarray,
    values: np.ndarray,
    weights: np.ndarray,
    num_basis: int = COVARIANCE_NUM_BASIS,
) -> Tuple[np.ndarray, float]:
    """
    Weighted tensor-product P-spline smooth of a surface on grid x grid.

    Args:
        grid: Increasing grid of length m
        values: m x m surface (ignored where weight is zero)
        weights: m x m nonnegative weights
        num_basis: B-spline functions per dimension

    Returns:
        Tuple[np.ndarray, float]: (smoothed m x m surface, selected log10 lambda)
    """
    grid = np.asarray(grid, dtype=float)
    weights = _normalize_weights(weights)
    values = np.where(weights > 0, np.nan_to_num(np.asarray(values, dtype=float)), 0.0)

    design = _basis_matrix(grid, num_basis)
    size = design.shape[1]
    second = difference_penalty(size, 2)
    identity = np.eye(size)
    penalty = np.kron(second, identity) + np.kron(identity, second)

    # gram[(a,b),(c,d)] = sum_jk w_jk B_ja B_jc B_kb B_kd
    inner = np.einsum('jk,kb,kd->jbd', weights, design, design, optimize=True)
    gram = np.einsum('ja,jc,jbd->abcd', design, design, inner, optimize=True)
    gram = gram.reshape(size * size, size * size)
    rhs = (design.T @ (weights * values) @ design).reshape(-1)

    def rss_of(coef):
        fitted = design @ coef.reshape(size, size) @ design.T
        return float(np.sum(weights * (values - fitted) ** 2))

    coef, log_lambda = _gcv_select(gram, rhs, penalty, rss_of, int(np.sum(weights > 0)))
    surface = design @ coef.reshape(size, size) @ design.T
    return surface, log_lambda
