"""Variance-component tests of the coefficient shape."""
from vctest.pipeline import TestOptions, prepare_design, run_all_tests, run_test
from vctest.results import TestResult
from vctest.rlrt import rlrt_pvalue, rlrt_statistic, simulate_rlrt_null
from vctest.score import score_statistic, score_test

__all__ = [
    'TestOptions',
    'TestResult',
    'prepare_design',
    'run_test',
    'run_all_tests',
    'rlrt_statistic',
    'rlrt_pvalue',
    'simulate_rlrt_null',
    'score_statistic',
    'score_test',
]
