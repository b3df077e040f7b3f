"""
Text summaries for the terminal.
Provides consistent formatting of test results, FPCA fits and experiment tables.
"""
import logging
from typing import List

import pandas as pd

logger = logging.getLogger(__name__)


def format_test_result(result) -> str:
    """
    Format one test result.

    Args:
        result: TestResult

    Returns:
        str: Formatted summary
    """
    diagnostics = result.diagnostics
    lines = [
        f"{result.hypothesis.value.capitalize()} test ({result.method.value})",
        f"  statistic: {result.statistic:.4f}",
        f"  p-value:   {result.p_value:.4f}",
    ]
    if result.mass_at_zero is not None:
        lines.append(f"  null draws: {result.null_draws} (mass at zero {result.mass_at_zero:.3f})")
    if 'kx' in diagnostics:
        lines.append(f"  K_x = {diagnostics['kx']}, K_u = {diagnostics.get('ku')}")
    if 'lambda_hat' in diagnostics:
        lines.append(f"  lambda = {diagnostics['lambda_hat']:.4g}")
    if not result.converged:
        lines.append("  WARNING: PQL did not converge")
    return '\n'.join(lines)


def format_results_table(results: List) -> str:
    """
    Statistic and p-value per hypothesis (rows) and method (columns).

    Args:
        results: TestResults of one dataset

    Returns:
        str: Formatted table
    """
    frame = pd.DataFrame([
        {
            'hypothesis': r.hypothesis.value,
            'method': r.method.value,
            'statistic': r.statistic,
            'p-value': r.p_value,
        }
        for r in results
    ])
    order = list(dict.fromkeys(frame['hypothesis']))
    table = frame.pivot(index='hypothesis', columns='method', values=['statistic', 'p-value'])
    table = table.swaplevel(axis=1).sort_index(axis=1, level=0, sort_remaining=False)
    return table.loc[order].to_string(float_format=lambda v: f"{v:.4f}")


def format_experiment_table(rows: List[dict]) -> str:
    """
    Rejection rates with rows (family, n, m_i, coefficient, delta) and columns
    (hypothesis, method).

    Args:
        rows: ExperimentResult rows

    Returns:
        str: Formatted table, followed by the largest standard error
    """
    if not rows:
        return "No experiment results."

    frame = pd.DataFrame(rows)
    table = frame.pivot_table(
        index=['family', 'n', 'm_i', 'coefficient', 'delta'],
        columns=['hypothesis', 'method'],
        values='rate',
        aggfunc='first',
        sort=False,
    )
    text = table.to_string(float_format=lambda v: f"{v:.3f}", na_rep='-')

    nonconverged = int(frame['nonconverged'].sum())
    footer = f"Maximum standard error: {frame['se'].max():.4f}"
    if nonconverged:
        footer += f"; {nonconverged} nonconverged replicate(s) counted as non-rejections"
    return f"{text}\n\n{footer}"


def format_fpca_summary(model) -> str:
    """Short description of an FPCA fit."""
    shown = ', '.join(f"{v:.4g}" for v in model.eigenvalues[:model.kx])
    source = 'forced' if model.kx_forced else 'AIC'
    return (
        f"FPCA on {model.grid.size} grid points\n"
        f"  K_x = {model.kx} ({source})\n"
        f"  eigenvalues: {shown}\n"
        f"  noise variance: {model.noise_var:.4g}"
    )
