"""
Difference penalties and their eigendecomposition.
Splits spline coefficients g into penalized u* = Q1'g and unpenalized beta* = Q2'g.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from utils.errors import RankError, ValidationError
from utils.numerics import sign_fix_columns

logger = logging.getLogger(__name__)

SUPPORTED_ORDERS = (0, 1, 2)
ZERO_EIGENVALUE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class PenaltyDecomposition:
    """Eigendecomposition P_d = Q1 diag(lambda1) Q1'."""

    order: int
    penalty: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    lambda1: np.ndarray

    @property
    def num_basis(self) -> int:
        return self.penalty.shape[0]

    @property
    def num_penalized(self) -> int:
        return self.q1.shape[1]

    def split(self, coefficients: np.ndarray):
        """Split spline coefficients into (u_star, beta_star)."""
        coefficients = np.asarray(coefficients, dtype=float)
        return self.q1.T @ coefficients, self.q2.T @ coefficients

    def combine(self, u_star: np.ndarray, beta_star: np.ndarray) -> np.ndarray:
        """Spline coefficients Q1 u* + Q2 beta*."""
        return self.q1 @ np.asarray(u_star, dtype=float) + self.q2 @ np.asarray(beta_star, dtype=float)


def difference_penalty(num_basis: int, order: int) -> np.ndarray:
    """
    Build the d-th order difference penalty D_d' D_d.

    The zero-order penalty is the identity (ridge), so every coefficient is penalized.

    Args:
        num_basis: Number of spline coefficients (K_u)
        order: Difference order d in {0, 1, 2}

    Returns:
        np.ndarray: Symmetric positive semidefinite matrix of rank num_basis - order
    """
    if order not in SUPPORTED_ORDERS:
        raise ValidationError(f"Unsupported penalty order: {order}")

    if num_basis <= order:
        raise ValidationError(f"num_basis={num_basis} must exceed penalty order {order}")

    if order == 0:
        return np.eye(num_basis)

    differences = np.diff(np.eye(num_basis), order, axis=0)
    return differences.T @ differences


def decompose_penalty(penalty: np.ndarray, order: int) -> PenaltyDecomposition:
    """
    Eigendecompose a difference penalty into penalized and unpenalized parts.

    Eigenvalues are sorted in decreasing order; the `order` smallest must be numerically
    zero (below 1e-8 times the largest) and their eigenvectors form Q2.

    Raises:
        RankError: If the number of zero eigenvalues differs from the order
    """
    penalty = np.asarray(penalty, dtype=float)

    if penalty.ndim != 2 or penalty.shape[0] != penalty.shape[1]:
        raise ValidationError(f"Penalty must be square, got shape {penalty.shape}")

    if order not in SUPPORTED_ORDERS:
        raise ValidationError(f"Unsupported penalty order: {order}")

    values, vectors = linalg.eigh(penalty)
    descending = np.argsort(-values, kind='stable')
    values = values[descending]
    vectors = vectors[:, descending]

    threshold = ZERO_EIGENVALUE_TOL * max(float(values[0]), 0.0)
    zero_count = int(np.sum(values <= threshold))

    if zero_count != order:
        logger.error(f"Penalty has {zero_count} zero eigenvalues, expected {order}")
        raise RankError(
            f"Penalty rank {penalty.shape[0] - zero_count} does not match "
            f"{penalty.shape[0]} - {order}"
        )

    num_penalized = penalty.shape[0] - order
    vectors = sign_fix_columns(vectors)

    q1 = vectors[:, :num_penalized]
    q2 = vectors[:, num_penalized:]
    lambda1 = values[:num_penalized]

    for array in (q1, q2, lambda1):
        array.setflags(write=False)

    return PenaltyDecomposition(
        order=order,
        penalty=penalty,
        q1=q1,
        q2=q2,
        lambda1=lambda1,
    )
