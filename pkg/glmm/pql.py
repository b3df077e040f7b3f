"""
Penalized quasi-likelihood fitting of the generalized linear mixed model.
Alternates the normalized working response with a REML fit of the working linear
mixed model until the linear predictor stabilizes.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from config import Config
from design import GlmmDesign
from glmm.families import Family
from glmm.reml import WorkingLmm
from utils.decorators import finite_result
from utils.errors import ConvergenceError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PqlFit:
    """Converged (or last) PQL state with its working linear mixed model."""

    beta_hat: np.ndarray
    u_hat: np.ndarray
    sigma2_u: float
    sigma2_e: float
    lambda_hat: float
    y_work: np.ndarray
    x_work: np.ndarray
    z_work: np.ndarray
    weights: np.ndarray
    eta: np.ndarray
    iterations: int
    converged: bool
    rel_at_opt: float
    rel_at_zero: float
    null_eigenvalues: np.ndarray
    family: str

    @property
    def n(self) -> int:
        return self.x_work.shape[0]

    @property
    def p(self) -> int:
        return self.x_work.shape[1]


@finite_result
def working_response(y: np.ndarray, eta: np.ndarray, family: Family):
    """
    Normalized working response and weights.

    W = [g'(mu)^2 V(mu)]^-1 and Y~ = W^1/2 [eta + g'(mu)(y - mu)], with the mean clipped
    away from the boundary of its space.

    Returns:
        Tuple[np.ndarray, np.ndarray]: (working responses, weights)
    """
    y = np.asarray(y, dtype=float)
    eta = np.asarray(eta, dtype=float)

    if not np.all(np.isfinite(eta)):
        raise ConvergenceError("Linear predictor is not finite")

    mu = family.clip_mean(family.inverse_link(eta))
    derivative = family.link_derivative(mu)
    weights = 1.0 / (derivative ** 2 * family.variance(mu))
    y_work = np.sqrt(weights) * (eta + derivative * (y - mu))
    return y_work, weights


def pql_fit(
    design: GlmmDesign,
    y: np.ndarray,
    family: Family,
    lambda_fixed: Optional[float] = None,
    max_iter: int = Config.PQL_MAX_ITER,
    tol: float = Config.PQL_TOL,
) -> PqlFit:
    """
    Fit the GLMM by penalized quasi-likelihood.

    Args:
        design: Mixed-model design
        y: Responses
        family: Response family
        lambda_fixed: Hold the variance ratio fixed (0 gives the null fit)
        max_iter: Iteration cap
        tol: Max-norm tolerance on successive linear predictors

    Returns:
        PqlFit: Final state; `converged` is False after the cap or on separation
    """
    y = np.asarray(y, dtype=float)
    X, Z = design.X, design.Z

    eta = family.link(family.clip_mean(family.initial_mean(y)))
    converged = False
    iterations = 0
    lmm = None
    profile = None
    weights = None
    y_work = None

    while iterations < max_iter:
        iterations += 1
        y_work, weights = working_response(y, eta, family)
        root = np.sqrt(weights)
        lmm = WorkingLmm(y_work, root[:, None] * X, root[:, None] * Z)

        if lmm.exact_fit:
            # separation: constant working responses leave no residual variation
            profile = lmm.exact_profile()
            eta = X @ profile.beta
            logger.warning(
                f"PQL stopped at iteration {iterations}: the fixed effects reproduce the "
                f"working responses (separation)"
            )
            break

        profile = lmm.fit(lambda_fixed=lambda_fixed)

        eta_new = X @ profile.beta + Z @ profile.u
        change = float(np.max(np.abs(eta_new - eta)))
        eta = eta_new

        logger.debug(
            f"PQL iteration {iterations}: max|d eta| = {change:.3g}, lambda = {profile.lambda_hat:.4g}"
        )

        if not family.has_dispersion and np.all(family.at_clip_bound(eta)):
            logger.warning(
                f"PQL stopped at iteration {iterations}: every fitted mean is at the clip bound"
            )
            break

        if family.name == 'gaussian' or change < tol:
            converged = True
            break

    if not converged:
        logger.warning(f"PQL did not converge after {iterations} iteration(s)")

    return PqlFit(
        beta_hat=profile.beta,
        u_hat=profile.u,
        sigma2_u=profile.sigma2_u,
        sigma2_e=profile.sigma2_e,
        lambda_hat=profile.lambda_hat,
        y_work=y_work,
        x_work=lmm.X,
        z_work=lmm.Z,
        weights=weights,
        eta=eta,
        iterations=iterations,
        converged=converged,
        rel_at_opt=profile.rel_at_opt,
        rel_at_zero=profile.rel_at_zero,
        null_eigenvalues=lmm.null_eigenvalues,
        family=family.name,
    )
