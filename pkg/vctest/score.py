"""
Variance-component score test on the working linear mixed model.

The statistic U = Y'P0 Z Z'P0 Y / (2 s2^2) is referred to a scaled chi-square a chi2_b
whose mean matches tr(P0 Z Z') / (2 s2) and whose variance matches the efficient
information for s2_u after adjusting for the estimated residual variance.
"""
import logging
from typing import Optional, Tuple

import numpy as np
from scipy import stats

from design import GlmmDesign, Method
from glmm.families import Family
from glmm.pql import PqlFit, pql_fit
from utils.errors import ConvergenceError
from vctest.results import TestResult

logger = logging.getLogger(__name__)


def score_statistic(y_work: np.ndarray, x_work: np.ndarray, z_work: np.ndarray) -> Tuple[float, float]:
    """
    Score statistic and Satterthwaite p-value for s2_u = 0 in a working model.

    Returns:
        Tuple[float, float]: (statistic, p-value)
    """
    n, p = x_work.shape
    q, _ = np.linalg.qr(x_work)
    residual = y_work - q @ (q.T @ y_work)
    pz = z_work - q @ (q.T @ z_work)

    sigma2 = float(residual @ residual) / (n - p)
    if not sigma2 > 0:
        raise ConvergenceError("Null working model has zero residual variance")

    projected = pz.T @ residual
    statistic = float(projected @ projected) / (2.0 * sigma2 ** 2)

    gram = pz.T @ pz
    trace_a = float(np.trace(gram))
    if trace_a <= 0:
        return 0.0, 1.0

    trace_a2 = float(np.sum(gram * gram))
    info_tt = trace_a2 / (2.0 * sigma2 ** 2)
    info_ts = trace_a / (2.0 * sigma2 ** 2)
    info_ss = (n - p) / (2.0 * sigma2 ** 2)
    efficient = info_tt - info_ts ** 2 / info_ss

    mean = trace_a / (2.0 * sigma2)
    if efficient <= 0:
        return statistic, 1.0

    scale = efficient / (2.0 * mean)
    dof = 2.0 * mean ** 2 / efficient
    p_value = float(stats.chi2.sf(statistic / scale, dof))

    logger.debug(f"Score test: U={statistic:.4g}, scale={scale:.4g}, dof={dof:.4g}, p={p_value:.4g}")
    return statistic, p_value


def score_test(
    design: GlmmDesign,
    y: np.ndarray,
    family: Family,
    null_fit: Optional[PqlFit] = None,
) -> TestResult:
    """
    Score test of s2_u = 0 using the null-model PQL fit.

    Args:
        design: Mixed-model design
        y: Responses
        family: Response family
        null_fit: Existing fit with lambda fixed at 0; fitted here when omitted

    Returns:
        TestResult: aScore result with the null-fit diagnostics

    Raises:
        ConvergenceError: If the null fit did not converge
    """
    if null_fit is None:
        null_fit = pql_fit(design, y, family, lambda_fixed=0.0)

    if not null_fit.converged:
        raise ConvergenceError(f"Null PQL fit did not converge after {null_fit.iterations} iteration(s)")

    statistic, p_value = score_statistic(null_fit.y_work, null_fit.x_work, null_fit.z_work)
    return TestResult(
        hypothesis=design.hypothesis,
        method=Method.SCORE,
        statistic=statistic,
        p_value=p_value,
        diagnostics={
            'converged_null': null_fit.converged,
            'iterations_null': null_fit.iterations,
            'sigma2_e_null': null_fit.sigma2_e,
            'n': null_fit.n,
            'p': null_fit.p,
        },
    )
