"""Generalized linear mixed model fitting by penalized quasi-likelihood."""
from glmm.families import Family, get_family
from glmm.pql import PqlFit, pql_fit, working_response
from glmm.reml import RemlProfile, WorkingLmm, reml_profile

__all__ = [
    'Family',
    'get_family',
    'PqlFit',
    'pql_fit',
    'working_response',
    'RemlProfile',
    'WorkingLmm',
    'reml_profile',
]
