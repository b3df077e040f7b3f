"""
Functional dataset container.
Subjects observed on subsets of a common grid, plus scalar responses and a family tag.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from glmm.families import get_family
from utils.errors import DomainError, ValidationError

logger = logging.getLogger(__name__)

GRID_MATCH_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Subject:
    """One subject's observed curve."""

    subject_id: str
    grid: np.ndarray
    values: np.ndarray


@dataclass(eq=False)
class FunctionalDataset:
    """
    Curves, responses and family for one analysis.

    Each subject's grid must be a subset of common_grid. Responses are ordered like
    subjects; trials are required for the binomial family only.
    """

    subjects: List[Subject]
    common_grid: np.ndarray
    responses: np.ndarray
    family: str = 'gaussian'
    trials: Optional[np.ndarray] = None
    _indices: List[np.ndarray] = field(default_factory=list, init=False, repr=False)

    def __post_init__(self):
        self.common_grid = np.asarray(self.common_grid, dtype=float)
        self.responses = np.asarray(self.responses, dtype=float)
        if self.trials is not None:
            self.trials = np.asarray(self.trials, dtype=float)

        if self.common_grid.ndim != 1 or self.common_grid.size < 2:
            raise ValidationError("common_grid must be a vector with at least two points")

        if np.any(np.diff(self.common_grid) <= 0):
            raise ValidationError("common_grid must be strictly increasing")

        if not self.subjects:
            raise ValidationError("Dataset has no subjects")

        if self.responses.shape != (len(self.subjects),):
            raise ValidationError(
                f"Expected {len(self.subjects)} responses, got shape {self.responses.shape}"
            )

        self._indices = [self._locate(subject) for subject in self.subjects]

        family = get_family(self.family, self.trials)
        family.validate_response(self.responses)

        logger.debug(
            f"Dataset: {self.n} subjects, {self.m} grid points, "
            f"{self.total_observations} observations, family={self.family}"
        )

    def _locate(self, subject: Subject) -> np.ndarray:
        grid = np.asarray(subject.grid, dtype=float)
        values = np.asarray(subject.values, dtype=float)

        if grid.ndim != 1 or grid.shape != values.shape:
            raise ValidationError(
                f"Subject {subject.subject_id}: grid and values lengths differ"
            )

        if grid.size < 1:
            raise ValidationError(f"Subject {subject.subject_id} has no observations")

        if not np.all(np.isfinite(values)):
            raise ValidationError(f"Subject {subject.subject_id} has non-finite values")

        index = np.searchsorted(self.common_grid, grid)
        index = np.clip(index, 0, self.common_grid.size - 1)
        left = np.clip(index - 1, 0, self.common_grid.size - 1)
        closer_left = np.abs(self.common_grid[left] - grid) < np.abs(self.common_grid[index] - grid)
        index = np.where(closer_left, left, index)

        scale = max(1.0, float(np.max(np.abs(self.common_grid))))
        if np.any(np.abs(self.common_grid[index] - grid) > GRID_MATCH_TOL * scale):
            raise DomainError(f"Subject {subject.subject_id} has points off the common grid")

        if np.unique(index).size != index.size:
            raise ValidationError(f"Subject {subject.subject_id} has duplicated grid points")

        return index

    @property
    def n(self) -> int:
        return len(self.subjects)

    @property
    def m(self) -> int:
        return self.common_grid.size

    @property
    def ids(self) -> List[str]:
        return [subject.subject_id for subject in self.subjects]

    @property
    def domain(self):
        return float(self.common_grid[0]), float(self.common_grid[-1])

    @property
    def observation_counts(self) -> np.ndarray:
        return np.array([index.size for index in self._indices])

    @property
    def total_observations(self) -> int:
        return int(self.observation_counts.sum())

    def indices(self, i: int) -> np.ndarray:
        """Positions of subject i's observations on the common grid."""
        return self._indices[i]

    def is_dense(self, i: int) -> bool:
        return self._indices[i].size == self.m

    def observed_matrix(self) -> np.ndarray:
        """Subjects x grid matrix with NaN where a point was not observed."""
        matrix = np.full((self.n, self.m), np.nan)
        for i, subject in enumerate(self.subjects):
            matrix[i, self._indices[i]] = subject.values
        return matrix

    @classmethod
    def from_dense(
        cls,
        curves: np.ndarray,
        grid: Sequence[float],
        responses: Sequence[float],
        family: str = 'gaussian',
        trials: Optional[Sequence[float]] = None,
        ids: Optional[Sequence[str]] = None,
    ) -> 'FunctionalDataset':
        """Build a dataset from an n x m matrix; NaN entries are treated as unobserved."""
        curves = np.asarray(curves, dtype=float)
        grid = np.asarray(grid, dtype=float)
        if ids is None:
            ids = [f"s{i + 1:04d}" for i in range(curves.shape[0])]

        subjects = []
        for subject_id, row in zip(ids, curves):
            observed = ~np.isnan(row)
            subjects.append(Subject(str(subject_id), grid[observed], row[observed]))

        return cls(
            subjects=subjects,
            common_grid=grid,
            responses=np.asarray(responses, dtype=float),
            family=family,
            trials=None if trials is None else np.asarray(trials, dtype=float),
        )
