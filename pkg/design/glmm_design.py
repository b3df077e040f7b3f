"""
Mixed-model design for the scalar-on-function model.
Builds the integration matrix J, fixed design X = [1 | xi J Q2] and random design
Z = xi J Q1 Lambda1^-1/2, and maps effects back to the coefficient function.
"""
import logging
from dataclasses import dataclass

import numpy as np

from bases import PenaltyDecomposition, SplineBasis, evaluate_basis
from design.hypotheses import Hypothesis
from utils.errors import DomainError, ValidationError
from utils.numerics import refine_grid, trapezoid_weights

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GlmmDesign:
    """Fixed and random designs for one hypothesis."""

    hypothesis: Hypothesis
    penalty: PenaltyDecomposition
    J: np.ndarray
    X: np.ndarray
    Z: np.ndarray

    @property
    def order(self) -> int:
        return self.penalty.order

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


def compute_J(
    eigenfunctions: np.ndarray,
    basis: SplineBasis,
    grid: np.ndarray,
    refine: int = 1,
) -> np.ndarray:
    """
    Integrated products of eigenfunctions and B-splines.

    Entry (k, l) is the trapezoidal integral of psi_k(t) B_l(t). With refine > 1 the grid
    is subdivided, eigenfunctions are interpolated linearly and splines evaluated exactly.

    Args:
        eigenfunctions: m x K_x eigenfunctions on the grid
        basis: Spline basis for the coefficient
        grid: Common grid of length m
        refine: Subdivisions per grid interval

    Returns:
        np.ndarray: K_x x K_u matrix

    Raises:
        DomainError: If the grid and the basis domain disagree
    """
    grid = np.asarray(grid, dtype=float)
    psi = np.asarray(eigenfunctions, dtype=float)
    if psi.ndim == 1:
        psi = psi[:, None]

    if psi.shape[0] != grid.size:
        raise DomainError(f"Eigenfunctions have {psi.shape[0]} rows but the grid has {grid.size}")

    span = basis.domain_hi - basis.domain_lo
    if abs(grid[0] - basis.domain_lo) > 1e-9 * span or abs(grid[-1] - basis.domain_hi) > 1e-9 * span:
        raise DomainError(
            f"Grid [{grid[0]}, {grid[-1]}] does not match basis domain "
            f"[{basis.domain_lo}, {basis.domain_hi}]"
        )

    if refine > 1:
        fine = refine_grid(grid, refine)
        psi = np.column_stack([np.interp(fine, grid, column) for column in psi.T])
        grid = fine

    weights = trapezoid_weights(grid)
    splines = evaluate_basis(basis, grid)
    return psi.T @ (weights[:, None] * splines)


def build_design(scores: np.ndarray, J: np.ndarray, penalty: PenaltyDecomposition) -> GlmmDesign:
    """
    Assemble the mixed-model design.

    Args:
        scores: n x K_x FPCA scores
        J: K_x x K_u integration matrix
        penalty: Decomposed difference penalty over K_u coefficients

    Returns:
        GlmmDesign: X is n x (1 + d), Z is n x (K_u - d)
    """
    scores = np.asarray(scores, dtype=float)
    J = np.asarray(J, dtype=float)

    if scores.ndim != 2 or J.ndim != 2 or scores.shape[1] != J.shape[0]:
        raise ValidationError(f"Score matrix {scores.shape} does not match J {J.shape}")

    if J.shape[1] != penalty.num_basis:
        raise ValidationError(
            f"J has {J.shape[1]} columns but the penalty covers {penalty.num_basis} coefficients"
        )

    projected = scores @ J
    fixed = np.column_stack([np.ones(scores.shape[0]), projected @ penalty.q2])
    random = (projected @ penalty.q1) / np.sqrt(penalty.lambda1)[None, :]

    hypothesis = Hypothesis.from_order(penalty.order)
    logger.debug(f"{hypothesis.value} design: X {fixed.shape}, Z {random.shape}")

    return GlmmDesign(hypothesis=hypothesis, penalty=penalty, J=J, X=fixed, Z=random)


def coefficient_from_effects(
    penalty: PenaltyDecomposition,
    basis: SplineBasis,
    beta_star: np.ndarray,
    u_star: np.ndarray,
    grid: np.ndarray,
) -> np.ndarray:
    """
    Evaluate beta(t) = B(t)'(Q1 u* + Q2 beta*) on a grid.

    Args:
        penalty: Decomposed penalty
        basis: Spline basis
        beta_star: d unpenalized effects
        u_star: K_u - d penalized effects on the original scale (u* = Lambda1^-1/2 u)
        grid: Evaluation grid

    Returns:
        np.ndarray: Coefficient function on the grid
    """
    beta_star = np.atleast_1d(np.asarray(beta_star, dtype=float))
    u_star = np.atleast_1d(np.asarray(u_star, dtype=float))

    if beta_star.shape != (penalty.q2.shape[1],) or u_star.shape != (penalty.q1.shape[1],):
        raise ValidationError(
            f"Effects of shape {beta_star.shape}/{u_star.shape} do not match penalty order "
            f"{penalty.order} with {penalty.num_basis} coefficients"
        )

    return evaluate_basis(basis, grid) @ penalty.combine(u_star, beta_star)
