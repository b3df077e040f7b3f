"""
Restricted likelihood of the working linear mixed model.

    Y = X beta + Z u + e,  u ~ N(0, s2_u I),  e ~ N(0, s2_e I),  lambda = s2_u / s2_e

With s2_e profiled out and V = I + lambda Z Z', the restricted log-likelihood is

    REL(lambda) = -1/2 [log|V| + log|X'V^-1 X| + (n - p) log(Y'P'V^-1 P Y)]

and is evaluated in the spectral form of Z' P0 Z, P0 = I - X(X'X)^-1 X', so every lambda
costs O(K) after one decomposition.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from utils.errors import ConvergenceError, RankError, ValidationError
from utils.numerics import maximize_log_lambda

logger = logging.getLogger(__name__)

ZERO_MU_TOL = 1e-10
EXACT_FIT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class RemlProfile:
    """Variance-ratio estimate and REL values of one working model fit."""

    lambda_hat: float
    sigma2_u: float
    sigma2_e: float
    rel_at_opt: float
    rel_at_zero: float
    beta: np.ndarray
    u: np.ndarray


class WorkingLmm:
    """
    Spectral representation of a working linear mixed model.

    Args:
        y: Working responses, length n
        X: n x p fixed design (full column rank)
        Z: n x K random design
    """

    def __init__(self, y: np.ndarray, X: np.ndarray, Z: np.ndarray):
        self.y = np.asarray(y, dtype=float)
        self.X = np.asarray(X, dtype=float)
        self.Z = np.asarray(Z, dtype=float)

        n, p = self.X.shape
        if self.y.shape != (n,) or self.Z.shape[0] != n:
            raise ValidationError(
                f"Inconsistent working model: y {self.y.shape}, X {self.X.shape}, Z {self.Z.shape}"
            )
        if n <= p:
            raise ValidationError(f"Need n > p, got n={n}, p={p}")
        if not (np.all(np.isfinite(self.y)) and np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.Z))):
            raise ConvergenceError("Working model contains non-finite values")
        if np.linalg.matrix_rank(self.X) < p:
            raise RankError(f"Fixed design is rank deficient (p={p})")

        self.n = n
        self.p = p

        q, _ = np.linalg.qr(self.X)
        qty = q.T @ self.y
        qtz = q.T @ self.Z

        self.residual_ss = max(float(self.y @ self.y - qty @ qty), 0.0)
        self.exact_fit = self.residual_ss <= EXACT_FIT_TOL * float(self.y @ self.y)

        _, self.logdet_xtx = np.linalg.slogdet(self.X.T @ self.X)

        if self.Z.shape[1] == 0:
            self.mu = np.zeros(0)
            self.w2 = np.zeros(0)
            return

        ztp0z = self.Z.T @ self.Z - qtz.T @ qtz
        values, vectors = linalg.eigh((ztp0z + ztp0z.T) / 2.0)
        scale = max(float(values[-1]), 0.0)
        keep = values > ZERO_MU_TOL * max(scale, 1.0)

        ztp0y = self.Z.T @ self.y - qtz.T @ qty
        projections = vectors[:, keep].T @ ztp0y

        self.mu = values[keep][::-1].copy()
        self.w2 = (projections ** 2 / values[keep])[::-1].copy()

    @property
    def null_eigenvalues(self) -> np.ndarray:
        """Nonzero eigenvalues of Z' P0 Z, decreasing."""
        return self.mu

    def quadratic_form(self, lam) -> np.ndarray:
        """Y'P'V^-1 P Y at lambda."""
        lam = np.asarray(lam, dtype=float)
        shrink = (lam[..., None] * self.mu) / (1.0 + lam[..., None] * self.mu)
        form = self.residual_ss - np.sum(shrink * self.w2, axis=-1)
        return np.maximum(form, self.residual_ss * 1e-15)

    def rel(self, lam) -> np.ndarray:
        """Restricted log-likelihood (constants dropped) at lambda >= 0."""
        lam = np.asarray(lam, dtype=float)
        logdet = np.sum(np.log1p(lam[..., None] * self.mu), axis=-1)
        return -0.5 * (
            self.logdet_xtx + logdet + (self.n - self.p) * np.log(self.quadratic_form(lam))
        )

    def estimate_effects(self, lam: float):
        """Fixed effects and random-effect predictions at lambda via Henderson's equations."""
        if lam <= 0 or self.Z.shape[1] == 0:
            beta = np.linalg.lstsq(self.X, self.y, rcond=None)[0]
            return beta, np.zeros(self.Z.shape[1])

        k = self.Z.shape[1]
        xtz = self.X.T @ self.Z
        system = np.block([
            [self.X.T @ self.X, xtz],
            [xtz.T, self.Z.T @ self.Z + np.eye(k) / lam],
        ])
        rhs = np.concatenate([self.X.T @ self.y, self.Z.T @ self.y])

        try:
            solution = linalg.solve(system, rhs, assume_a='sym')
        except (linalg.LinAlgError, ValueError):
            solution = np.linalg.lstsq(system, rhs, rcond=None)[0]

        return solution[:self.p], solution[self.p:]

    def fit(self, lambda_fixed=None) -> RemlProfile:
        """
        Maximize the profiled REL over lambda >= 0, or evaluate it at a fixed lambda.

        Returns:
            RemlProfile: Estimates and REL at the optimum and at lambda = 0
        """
        if self.exact_fit:
            raise ConvergenceError("Working responses are fitted exactly by the fixed effects")

        rel_zero = float(self.rel(0.0))

        if lambda_fixed is not None:
            lam = float(lambda_fixed)
            if lam < 0:
                raise ValidationError(f"lambda must be nonnegative, got {lam}")
            rel_opt = float(self.rel(lam))
        elif self.mu.size == 0:
            lam, rel_opt = 0.0, rel_zero
        else:
            lam_arr, value_arr = maximize_log_lambda(
                lambda log_lam: self.rel(np.power(10.0, log_lam)),
                np.array([rel_zero]),
            )
            lam, rel_opt = float(lam_arr[0]), float(value_arr[0])

        if not (np.isfinite(rel_opt) and np.isfinite(rel_zero)):
            raise ConvergenceError("Restricted likelihood is not finite")

        sigma2_e = float(self.quadratic_form(lam)) / (self.n - self.p)
        beta, u = self.estimate_effects(lam)

        logger.debug(
            f"REML: lambda={lam:.4g}, sigma2_e={sigma2_e:.4g}, "
            f"REL(opt)-REL(0)={rel_opt - rel_zero:.4g}"
        )
        return RemlProfile(
            lambda_hat=lam,
            sigma2_u=lam * sigma2_e,
            sigma2_e=sigma2_e,
            rel_at_opt=rel_opt,
            rel_at_zero=rel_zero,
            beta=beta,
            u=u,
        )

    def exact_profile(self) -> RemlProfile:
        """Degenerate state when the fixed effects reproduce the working responses."""
        beta = np.linalg.lstsq(self.X, self.y, rcond=None)[0]
        return RemlProfile(
            lambda_hat=0.0,
            sigma2_u=0.0,
            sigma2_e=0.0,
            rel_at_opt=0.0,
            rel_at_zero=0.0,
            beta=beta,
            u=np.zeros(self.Z.shape[1]),
        )


def reml_profile(y: np.ndarray, X: np.ndarray, Z: np.ndarray, lambda_fixed=None) -> RemlProfile:
    """
    Fit a working linear mixed model by REML.

    Args:
        y: Working responses
        X: Weighted fixed design
        Z: Weighted random design
        lambda_fixed: Hold lambda at this value instead of maximizing

    Returns:
        RemlProfile: lambda_hat, sigma2_u, sigma2_e, rel_at_opt, rel_at_zero and effects
    """
    return WorkingLmm(y, X, Z).fit(lambda_fixed=lambda_fixed)
