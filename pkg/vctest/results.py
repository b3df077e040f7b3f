"""
Test results.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from design.hypotheses import Hypothesis, Method

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TestResult:
    """Outcome of one shape test."""

    __test__ = False

    hypothesis: Hypothesis
    method: Method
    statistic: float
    p_value: float
    null_draws: int = 0
    mass_at_zero: Optional[float] = None
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    coefficient: Optional[np.ndarray] = None
    grid: Optional[np.ndarray] = None

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p-value {self.p_value} outside [0, 1]")
        if self.method == Method.RLRT and self.statistic < 0:
            raise ValueError(f"RLRT statistic {self.statistic} is negative")
        if self.mass_at_zero is not None and not 0.0 <= self.mass_at_zero <= 1.0:
            raise ValueError(f"mass_at_zero {self.mass_at_zero} outside [0, 1]")

    @property
    def converged(self) -> bool:
        return all(
            value for key, value in self.diagnostics.items() if key.startswith('converged')
        )

    def rejects(self, alpha: float) -> bool:
        return self.p_value <= alpha

    def to_dict(self) -> dict:
        """JSON-ready representation."""
        return {
            'hypothesis': self.hypothesis.value,
            'method': self.method.value,
            'statistic': float(self.statistic),
            'p_value': float(self.p_value),
            'null_draws': int(self.null_draws),
            'mass_at_zero': None if self.mass_at_zero is None else float(self.mass_at_zero),
            'converged': self.converged,
            'diagnostics': {key: _plain(value) for key, value in sorted(self.diagnostics.items())},
            'coefficient': None if self.coefficient is None else {
                'grid': np.asarray(self.grid).tolist(),
                'beta': np.asarray(self.coefficient).tolist(),
            },
        }


def _plain(value):
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)) and not isinstance(value, bool):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value
