"""
Shared numerical helpers.
Quadrature weights, eigenvector sign conventions and the log-scale variance-ratio search
used both by the working-model REML fit and by the null-distribution simulation.
"""
import logging
import math
from typing import Callable, Tuple

import numpy as np

logger = logging.getLogger(__name__)

LOG10_LAMBDA_LO = -8.0
LOG10_LAMBDA_HI = 8.0
LAMBDA_GRID_POINTS = 41
LOG_LAMBDA_TOL = 1e-8

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    """
    Trapezoidal quadrature weights on an ordered grid.

    Args:
        grid: Strictly increasing grid points

    Returns:
        np.ndarray: Weights w with sum(w * f(grid)) approximating the integral of f
    """
    grid = np.asarray(grid, dtype=float)
    weights = np.zeros_like(grid)
    if grid.size < 2:
        return weights

    steps = np.diff(grid)
    weights[:-1] += steps / 2.0
    weights[1:] += steps / 2.0
    return weights


def sign_fix_columns(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so that the entry of largest magnitude is positive."""
    if vectors.size == 0:
        return vectors

    rows = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[rows, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def refine_grid(grid: np.ndarray, factor: int) -> np.ndarray:
    """Insert factor - 1 equally spaced points inside every grid interval."""
    if factor <= 1:
        return np.asarray(grid, dtype=float)

    pieces = [
        np.linspace(lo, hi, factor, endpoint=False)
        for lo, hi in zip(grid[:-1], grid[1:])
    ]
    return np.concatenate(pieces + [np.asarray(grid[-1:], dtype=float)])


def maximize_log_lambda(
    objective: Callable[[np.ndarray], np.ndarray],
    value_at_zero: np.ndarray,
    log10_lo: float = LOG10_LAMBDA_LO,
    log10_hi: float = LOG10_LAMBDA_HI,
    grid_points: int = LAMBDA_GRID_POINTS,
    tol: float = LOG_LAMBDA_TOL,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Maximize many one-dimensional objectives over lambda >= 0 at once.

    The search brackets the maximum on an equally spaced log10 grid, refines it by
    golden-section search in log lambda, and finally compares against lambda = 0.

    Args:
        objective: Maps log10(lambda) values of shape (S, k) to objective values (S, k)
        value_at_zero: Objective values at lambda = 0, shape (S,)
        log10_lo: Lower end of the log10 lambda search range
        log10_hi: Upper end of the log10 lambda search range
        grid_points: Number of bracketing grid points
        tol: Absolute tolerance on natural-log lambda

    Returns:
        Tuple[np.ndarray, np.ndarray]: (lambda_hat, value_at_optimum), both shape (S,)
    """
    value_at_zero = np.atleast_1d(np.asarray(value_at_zero, dtype=float))
    series = value_at_zero.shape[0]

    grid = np.linspace(log10_lo, log10_hi, grid_points)
    grid_values = objective(np.broadcast_to(grid, (series, grid_points)))
    best_index = np.argmax(grid_values, axis=1)
    best_log = grid[best_index]
    best_value = grid_values[np.arange(series), best_index]

    a = grid[np.maximum(best_index - 1, 0)]
    b = grid[np.minimum(best_index + 1, grid_points - 1)]

    tol_log10 = tol / math.log(10.0)
    width = float(np.max(b - a)) if series else 0.0
    n_iter = 0
    if width > tol_log10:
        n_iter = int(math.ceil(math.log(tol_log10 / width) / math.log(_INV_PHI)))

    def evaluate(points: np.ndarray) -> np.ndarray:
        return objective(points[:, None])[:, 0]

    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc = evaluate(c)
    fd = evaluate(d)

    for _ in range(n_iter):
        left = fc >= fd
        new_a = np.where(left, a, c)
        new_b = np.where(left, d, b)
        new_point = np.where(
            left,
            new_b - _INV_PHI * (new_b - new_a),
            new_a + _INV_PHI * (new_b - new_a),
        )
        f_new = evaluate(new_point)

        c, fc, d, fd = (
            np.where(left, new_point, d),
            np.where(left, f_new, fd),
            np.where(left, c, new_point),
            np.where(left, fc, f_new),
        )
        a, b = new_a, new_b

    for point, value in ((c, fc), (d, fd)):
        better = value > best_value
        best_log = np.where(better, point, best_log)
        best_value = np.where(better, value, best_value)

    lambda_hat = np.power(10.0, best_log)
    zero_wins = value_at_zero >= best_value
    lambda_hat = np.where(zero_wins, 0.0, lambda_hat)
    best_value = np.where(zero_wins, value_at_zero, best_value)

    return lambda_hat, best_value
