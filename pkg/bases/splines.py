"""
B-spline basis construction and evaluation.
Equally spaced breakpoints with full boundary-knot multiplicity.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BSpline

from config import Config
from utils.errors import DomainError, ValidationError

logger = logging.getLogger(__name__)

DOMAIN_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SplineBasis:
    """B-spline basis on [domain_lo, domain_hi]."""

    domain_lo: float
    domain_hi: float
    degree: int
    num_basis: int
    knots: np.ndarray

    def __post_init__(self):
        self.knots.setflags(write=False)

    @property
    def breakpoints(self) -> np.ndarray:
        return self.knots[self.degree:len(self.knots) - self.degree]

    def contains(self, grid: np.ndarray) -> bool:
        grid = np.asarray(grid, dtype=float)
        return bool(np.all(grid >= self.domain_lo - DOMAIN_TOL) and np.all(grid <= self.domain_hi + DOMAIN_TOL))


def build_basis(
    domain_lo: float,
    domain_hi: float,
    num_basis: int = Config.NUM_BASIS,
    degree: int = Config.SPLINE_DEGREE,
) -> SplineBasis:
    """
    Build a B-spline basis with equally spaced knots.

    Uses num_basis - degree + 1 breakpoints on [domain_lo, domain_hi], each boundary
    knot repeated degree + 1 times, so the evaluation matrix has num_basis columns.

    Args:
        domain_lo: Left end of the domain
        domain_hi: Right end of the domain
        num_basis: Number of basis functions (K_u)
        degree: Polynomial degree (3 for cubic)

    Returns:
        SplineBasis: The basis

    Raises:
        ValidationError: If the domain is empty or num_basis is too small
    """
    if not np.isfinite(domain_lo) or not np.isfinite(domain_hi) or domain_lo >= domain_hi:
        raise ValidationError(f"Invalid domain [{domain_lo}, {domain_hi}]")

    if degree < 0:
        raise ValidationError(f"Invalid spline degree: {degree}")

    if num_basis < degree + 1:
        raise ValidationError(
            f"num_basis={num_basis} is too small for degree {degree} (need at least {degree + 1})"
        )

    breakpoints = np.linspace(domain_lo, domain_hi, num_basis - degree + 1)
    knots = np.concatenate([
        np.full(degree, float(domain_lo)),
        breakpoints,
        np.full(degree, float(domain_hi)),
    ])

    logger.debug(f"Built degree-{degree} basis with {num_basis} functions on [{domain_lo}, {domain_hi}]")
    return SplineBasis(
        domain_lo=float(domain_lo),
        domain_hi=float(domain_hi),
        degree=int(degree),
        num_basis=int(num_basis),
        knots=knots,
    )


def evaluate_basis(basis: SplineBasis, grid) -> np.ndarray:
    """
    Evaluate all basis functions on a grid.

    Args:
        basis: Spline basis
        grid: Evaluation points inside the basis domain

    Returns:
        np.ndarray: Matrix of shape (len(grid), num_basis); rows sum to one

    Raises:
        DomainError: If a grid point lies outside the domain
    """
    grid = np.atleast_1d(np.asarray(grid, dtype=float))

    if not basis.contains(grid):
        outside = grid[(grid < basis.domain_lo - DOMAIN_TOL) | (grid > basis.domain_hi + DOMAIN_TOL)]
        raise DomainError(
            f"{outside.size} grid point(s) outside [{basis.domain_lo}, {basis.domain_hi}], "
            f"first: {outside[0]}"
        )

    grid = np.clip(grid, basis.domain_lo, basis.domain_hi)
    matrix = BSpline.design_matrix(grid, basis.knots, basis.degree).toarray()
    return matrix
