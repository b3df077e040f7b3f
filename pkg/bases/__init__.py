"""B-spline bases, difference penalties and the penalized/unpenalized split."""
from bases.splines import SplineBasis, build_basis, evaluate_basis
from bases.penalty import PenaltyDecomposition, difference_penalty, decompose_penalty

__all__ = [
    'SplineBasis',
    'build_basis',
    'evaluate_basis',
    'PenaltyDecomposition',
    'difference_penalty',
    'decompose_penalty',
]
