"""Mixed-model design of the scalar-on-function model for a chosen hypothesis."""
from design.glmm_design import GlmmDesign, build_design, coefficient_from_effects, compute_J
from design.hypotheses import Hypothesis, Method

__all__ = [
    'GlmmDesign',
    'Hypothesis',
    'Method',
    'build_design',
    'coefficient_from_effects',
    'compute_J',
]
