"""Synthetic data and Monte Carlo experiments for the shape tests."""
from harness.experiments import ExperimentResult, ReplicateOutcome, power_mode, run_experiment
from harness.plan import ExperimentCell, build_plan
from harness.simulation import (
    SimConfig,
    SyntheticSample,
    coefficient_function,
    draw_sample,
    fourier_eigenfunctions,
    generate_dataset,
)

__all__ = [
    'ExperimentResult',
    'ReplicateOutcome',
    'power_mode',
    'run_experiment',
    'ExperimentCell',
    'build_plan',
    'SimConfig',
    'SyntheticSample',
    'coefficient_function',
    'draw_sample',
    'fourier_eigenfunctions',
    'generate_dataset',
]
