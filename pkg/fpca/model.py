"""
Fitted functional principal component model.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from config import Config
from fpca.dataset import FunctionalDataset
from fpca.estimation import (
    eigen_decompose,
    estimate_covariance,
    estimate_mean,
    estimate_scores,
    raw_covariance,
)
from fpca.truncation import aic_curve, select_kx
from utils.decorators import log_stage
from utils.errors import ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FpcaModel:
    """Mean, spectrum, noise variance and scores of a functional predictor."""

    grid: np.ndarray
    mean: np.ndarray
    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray
    noise_var: float
    scores: np.ndarray
    kx: int
    raw_variance: np.ndarray
    aic: np.ndarray
    kx_forced: bool = False

    @property
    def retained_eigenfunctions(self) -> np.ndarray:
        return self.eigenfunctions[:, :self.kx]

    def to_summary(self) -> dict:
        """JSON-ready summary."""
        return {
            'grid': self.grid.tolist(),
            'mean': self.mean.tolist(),
            'eigenvalues': self.eigenvalues.tolist(),
            'eigenfunctions': self.eigenfunctions[:, :self.kx].T.tolist(),
            'noise_var': float(self.noise_var),
            'kx': int(self.kx),
            'kx_forced': bool(self.kx_forced),
            'aic': self.aic.tolist(),
        }


@log_stage('fpca')
def fit_fpca(
    data: FunctionalDataset,
    d_max: int = 0,
    kx: Optional[int] = None,
    pre_centered: bool = False,
    max_components: int = Config.KX_SCAN_MAX,
) -> FpcaModel:
    """
    Fit mean, covariance spectrum, truncation and scores.

    Args:
        data: Functional dataset
        d_max: Largest penalty order to be tested (sets the K_x floor d_max + 1)
        kx: Forced truncation instead of AIC
        pre_centered: Treat the curves as already centered
        max_components: Upper end of the AIC scan

    Returns:
        FpcaModel: Fitted model
    """
    mu = estimate_mean(data, pre_centered=pre_centered)
    cov, noise_var = estimate_covariance(data, mu)
    eigenvalues, eigenfunctions = eigen_decompose(cov, data.common_grid)
    raw, _ = raw_covariance(data, mu)
    raw_variance = np.diag(raw).copy()

    scan = min(max_components, len(eigenvalues))
    aic = aic_curve(data, raw_variance, eigenvalues, eigenfunctions, scan) if scan else np.zeros(0)

    if kx is not None:
        floor = d_max + 1
        if kx < floor:
            raise ValidationError(f"K_x must be at least d+1 = {floor}")
        if kx > len(eigenvalues):
            raise ValidationError(
                f"K_x = {kx} exceeds the {len(eigenvalues)} positive eigenvalue(s)"
            )
        selected = int(kx)
        logger.info(f"Using forced K_x = {selected}")
    else:
        selected = select_kx(
            data, raw_variance, eigenvalues, eigenfunctions, d_max, max_components
        )

    scores = estimate_scores(data, mu, eigenvalues, eigenfunctions, noise_var, selected)

    logger.info(
        f"FPCA: {len(eigenvalues)} positive eigenvalue(s), K_x = {selected}, "
        f"sigma2_X = {noise_var:.4g}"
    )
    return FpcaModel(
        grid=data.common_grid,
        mean=mu,
        eigenvalues=eigenvalues,
        eigenfunctions=eigenfunctions,
        noise_var=noise_var,
        scores=scores,
        kx=selected,
        raw_variance=raw_variance,
        aic=aic,
        kx_forced=kx is not None,
    )
