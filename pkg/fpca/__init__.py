"""Functional principal components of a possibly sparse, noisy functional predictor."""
from fpca.dataset import FunctionalDataset, Subject
from fpca.estimation import (
    blup_scores,
    eigen_decompose,
    estimate_covariance,
    estimate_mean,
    estimate_scores,
    quadrature_scores,
    raw_covariance,
)
from fpca.model import FpcaModel, fit_fpca
from fpca.truncation import aic_curve, select_kx

__all__ = [
    'FunctionalDataset',
    'Subject',
    'FpcaModel',
    'fit_fpca',
    'estimate_mean',
    'estimate_covariance',
    'raw_covariance',
    'eigen_decompose',
    'estimate_scores',
    'quadrature_scores',
    'blup_scores',
    'select_kx',
    'aic_curve',
]
