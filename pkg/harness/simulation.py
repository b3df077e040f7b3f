"""
Synthetic data generation.

Curves follow a five-term Karhunen-Loeve expansion on an 80-point grid of [0, 1] with
measurement noise; responses come from the family's canonical link applied to
eta_i = integral of the noise-free curve times beta.
"""
import logging
from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np

from config import Config
from fpca.dataset import FunctionalDataset
from glmm.families import get_family
from utils.errors import DomainError, ValidationError
from utils.numerics import trapezoid_weights

logger = logging.getLogger(__name__)

COEFFICIENT_FORMS = ('scalar', 'linear', 'trig', 'tabulated')
DEFAULT_EIGENVALUES = (1.0, 0.5, 0.25, 0.125, 0.0625)


@dataclass(frozen=True)
class SimConfig:
    """One cell of a simulation design."""

    family: str = 'gaussian'
    coefficient: str = 'scalar'
    delta: float = 0.0
    n: int = 100
    m_i: int = 80
    grid_size: int = 80
    noise_var: float = 0.05
    eigenvalues: Tuple[float, ...] = DEFAULT_EIGENVALUES
    alpha: float = Config.ALPHA
    replicates: int = 100
    null_draws: int = Config.NULL_DRAWS
    seed: int = Config.SEED
    trials: int = 10
    beta_grid: Optional[Tuple[float, ...]] = None
    beta_values: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, 'family', str(self.family).lower())
        object.__setattr__(self, 'eigenvalues', tuple(float(v) for v in self.eigenvalues))

        if self.family not in Config.SUPPORTED_FAMILIES:
            raise ValidationError(f"Unsupported family: {self.family}")
        if self.coefficient not in COEFFICIENT_FORMS:
            raise ValidationError(f"Unknown coefficient form: {self.coefficient}")
        if self.grid_size < 2:
            raise ValidationError(f"grid_size must be at least 2, got {self.grid_size}")
        if not 1 <= self.m_i <= self.grid_size:
            raise ValidationError(f"m_i must lie in [1, {self.grid_size}], got {self.m_i}")
        if self.n < 2:
            raise ValidationError(f"n must be at least 2, got {self.n}")
        if self.replicates < 1:
            raise ValidationError(f"replicates must be at least 1, got {self.replicates}")
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.null_draws < 1:
            raise ValidationError(f"null_draws must be positive, got {self.null_draws}")
        if self.noise_var < 0:
            raise ValidationError(f"noise_var must be nonnegative, got {self.noise_var}")
        if not self.eigenvalues or min(self.eigenvalues) <= 0:
            raise ValidationError("eigenvalues must be a nonempty list of positive values")
        if len(self.eigenvalues) > self.grid_size:
            raise ValidationError("More eigenvalues than grid points")
        if self.family == 'binomial' and self.trials < 1:
            raise ValidationError(f"trials must be positive, got {self.trials}")

        if self.coefficient == 'tabulated':
            if self.beta_grid is None or self.beta_values is None:
                raise ValidationError("A tabulated coefficient needs beta_grid and beta_values")
            if len(self.beta_grid) != len(self.beta_values) or len(self.beta_grid) < 2:
                raise ValidationError("beta_grid and beta_values must have equal length >= 2")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.grid_size)

    @property
    def dense(self) -> bool:
        return self.m_i == self.grid_size

    def to_dict(self) -> dict:
        config = asdict(self)
        for key in ('eigenvalues', 'beta_grid', 'beta_values'):
            if config[key] is not None:
                config[key] = list(config[key])
        return config


@dataclass(frozen=True, eq=False)
class SyntheticSample:
    """A generated dataset together with the quantities it was drawn from."""

    data: FunctionalDataset
    latent: np.ndarray
    eta: np.ndarray
    beta: np.ndarray


def fourier_eigenfunctions(grid: np.ndarray, count: int) -> np.ndarray:
    """
    Orthonormal Fourier functions on [0, 1]: 1, sqrt2 sin 2pi t, sqrt2 cos 2pi t, ...

    Returns:
        np.ndarray: grid x count matrix
    """
    grid = np.asarray(grid, dtype=float)
    columns = [np.ones_like(grid)]
    for k in range(1, count):
        frequency = 2.0 * np.pi * ((k + 1) // 2)
        trig = np.sin if k % 2 == 1 else np.cos
        columns.append(np.sqrt(2.0) * trig(frequency * grid))
    return np.column_stack(columns[:count])


def coefficient_function(config: SimConfig, grid: np.ndarray) -> np.ndarray:
    """beta(t) of a configuration evaluated on a grid."""
    grid = np.asarray(grid, dtype=float)
    delta = config.delta

    if config.coefficient == 'scalar':
        return np.full_like(grid, delta)
    if config.coefficient == 'linear':
        return 1.0 + delta * grid
    if config.coefficient == 'trig':
        return 1.0 + grid + delta * np.cos(2.0 * np.pi * grid)

    table_grid = np.asarray(config.beta_grid, dtype=float)
    if grid.min() < table_grid.min() - 1e-9 or grid.max() > table_grid.max() + 1e-9:
        raise DomainError(
            f"Tabulated coefficient covers [{table_grid.min()}, {table_grid.max()}], "
            f"grid needs [{grid.min()}, {grid.max()}]"
        )
    order = np.argsort(table_grid)
    values = np.asarray(config.beta_values, dtype=float)[order]
    return delta * np.interp(grid, table_grid[order], values)


def draw_sample(config: SimConfig, rng: np.random.Generator) -> SyntheticSample:
    """
    Draw one synthetic dataset.

    Args:
        config: Simulation cell
        rng: Random generator (consumed in a fixed order)

    Returns:
        SyntheticSample: Observed dataset plus latent curves, eta and beta
    """
    grid = config.grid
    n, m = config.n, config.grid_size
    eigenvalues = np.asarray(config.eigenvalues)
    psi = fourier_eigenfunctions(grid, eigenvalues.size)

    scores = rng.normal(0.0, 1.0, size=(n, eigenvalues.size)) * np.sqrt(eigenvalues)
    latent = scores @ psi.T
    observed = latent + rng.normal(0.0, np.sqrt(config.noise_var), size=(n, m))

    if not config.dense:
        mask = np.full((n, m), np.nan)
        for i in range(n):
            keep = np.sort(rng.choice(m, size=config.m_i, replace=False))
            mask[i, keep] = 1.0
        observed = observed * mask

    beta = coefficient_function(config, grid)
    eta = latent @ (trapezoid_weights(grid) * beta)

    trials = np.full(n, float(config.trials)) if config.family == 'binomial' else None
    family = get_family(config.family, trials)
    responses = family.sample(eta, rng)

    data = FunctionalDataset.from_dense(observed, grid, responses, config.family, trials)
    return SyntheticSample(data=data, latent=latent, eta=eta, beta=beta)


def generate_dataset(config: SimConfig, seed: Optional[int] = None) -> FunctionalDataset:
    """Seeded synthetic dataset; the same seed yields an identical dataset."""
    seed = config.seed if seed is None else seed
    sample = draw_sample(config, np.random.default_rng(seed))
    logger.debug(
        f"Generated {config.family} dataset: n={config.n}, m_i={config.m_i}, "
        f"{config.coefficient} delta={config.delta}"
    )
    return sample.data
