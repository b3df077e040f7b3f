"""
Truncation selection for the Karhunen-Loeve expansion.
AIC over the number of components, floored by the penalty order under test.
"""
import logging

import numpy as np

from config import Config
from fpca.dataset import FunctionalDataset
from utils.errors import ValidationError
from utils.numerics import trapezoid_weights

logger = logging.getLogger(__name__)

VARIANCE_FLOOR = 1e-10


def marginal_error_variances(
    raw_variance: np.ndarray,
    eigenvalues: np.ndarray,
    eigenfunctions: np.ndarray,
    grid: np.ndarray,
    max_components: int,
) -> np.ndarray:
    """
    Marginal error variance for k = 1..max_components components.

    Integrates raw pointwise variance minus the k-term diagonal sum_l lambda_l psi_l(t)^2,
    floored at 1e-10.
    """
    weights = trapezoid_weights(grid)
    contributions = eigenfunctions[:, :max_components] ** 2 * eigenvalues[None, :max_components]
    explained = np.cumsum(contributions, axis=1)
    residual = raw_variance[:, None] - explained
    return np.maximum(weights @ residual, VARIANCE_FLOOR)


def aic_curve(
    data: FunctionalDataset,
    raw_variance: np.ndarray,
    eigenvalues: np.ndarray,
    eigenfunctions: np.ndarray,
    max_components: int,
) -> np.ndarray:
    """AIC_k = N log(sigma2_[k]) + N + 2 n k for k = 1..max_components."""
    total = data.total_observations
    sigma2 = marginal_error_variances(
        raw_variance, eigenvalues, eigenfunctions, data.common_grid, max_components
    )
    k = np.arange(1, max_components + 1)
    return total * np.log(sigma2) + total + 2.0 * data.n * k


def select_kx(
    data: FunctionalDataset,
    raw_variance: np.ndarray,
    eigenvalues: np.ndarray,
    eigenfunctions: np.ndarray,
    d_max: int,
    max_components: int = Config.KX_SCAN_MAX,
) -> int:
    """
    Choose K_x as the larger of the AIC minimizer and d_max + 1.

    Args:
        data: Functional dataset
        raw_variance: Pooled raw pointwise variance on the common grid
        eigenvalues: Positive decreasing eigenvalues
        eigenfunctions: Matching eigenfunctions on the grid
        d_max: Largest penalty order to be tested
        max_components: Upper end of the AIC scan

    Returns:
        int: Selected truncation

    Raises:
        ValidationError: If fewer than d_max + 1 positive eigenvalues exist
    """
    available = len(eigenvalues)
    floor = d_max + 1

    if available < floor:
        raise ValidationError(
            f"K_x must be at least d+1 = {floor}, but only {available} positive eigenvalue(s)"
        )

    scan = min(max_components, available)
    aic = aic_curve(data, raw_variance, eigenvalues, eigenfunctions, scan)
    best = int(np.argmin(aic)) + 1
    selected = max(best, floor)

    logger.info(f"AIC selected {best} component(s); using K_x = {selected}")
    return selected
