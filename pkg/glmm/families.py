"""
Exponential families with canonical links.
Provides link, inverse link, link derivative, conditional variance, response checks and
response sampling for the gaussian, bernoulli, binomial and poisson families.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import expit, logit

from utils.errors import ValidationError

logger = logging.getLogger(__name__)

PROB_CLIP = 1e-6
POISSON_FLOOR = 1e-8


@dataclass(frozen=True, eq=False)
class Family:
    """
    Response family with its canonical link.

    For the binomial family `trials` holds per-subject trial counts and the mean is the
    expected count, so mu = trials * p and Var(Y) = trials * p * (1 - p).
    """

    name: str
    trials: Optional[np.ndarray] = None

    @property
    def has_dispersion(self) -> bool:
        return self.name == 'gaussian'

    @property
    def link_name(self) -> str:
        return {
            'gaussian': 'identity',
            'bernoulli': 'logit',
            'binomial': 'logit',
            'poisson': 'log',
        }[self.name]

    def _size(self) -> np.ndarray:
        if self.name == 'binomial':
            return self.trials
        return np.ones(1)

    def clip_mean(self, mu: np.ndarray) -> np.ndarray:
        """Keep means away from the boundary of the mean space."""
        mu = np.asarray(mu, dtype=float)
        if self.name in ('bernoulli', 'binomial'):
            size = self._size()
            return size * np.clip(mu / size, PROB_CLIP, 1.0 - PROB_CLIP)
        if self.name == 'poisson':
            return np.maximum(mu, POISSON_FLOOR)
        return mu

    def at_clip_bound(self, eta: np.ndarray) -> np.ndarray:
        """True where the inverse link had to be clipped."""
        eta = np.asarray(eta, dtype=float)
        if self.name in ('bernoulli', 'binomial'):
            p = expit(eta)
            return (p <= PROB_CLIP) | (p >= 1.0 - PROB_CLIP)
        if self.name == 'poisson':
            return np.exp(eta) <= POISSON_FLOOR
        return np.zeros(eta.shape, dtype=bool)

    def link(self, mu: np.ndarray) -> np.ndarray:
        mu = np.asarray(mu, dtype=float)
        if self.name == 'gaussian':
            return mu
        if self.name in ('bernoulli', 'binomial'):
            return logit(mu / self._size())
        return np.log(mu)

    def inverse_link(self, eta: np.ndarray) -> np.ndarray:
        eta = np.asarray(eta, dtype=float)
        if self.name == 'gaussian':
            return eta
        if self.name in ('bernoulli', 'binomial'):
            return self._size() * expit(eta)
        return np.exp(eta)

    def link_derivative(self, mu: np.ndarray) -> np.ndarray:
        """g'(mu)."""
        mu = np.asarray(mu, dtype=float)
        if self.name == 'gaussian':
            return np.ones_like(mu)
        if self.name in ('bernoulli', 'binomial'):
            size = self._size()
            return size / (mu * (size - mu))
        return 1.0 / mu

    def mean_derivative(self, eta: np.ndarray) -> np.ndarray:
        """d mu / d eta, the reciprocal of g'(mu)."""
        return 1.0 / self.link_derivative(self.inverse_link(eta))

    def variance(self, mu: np.ndarray) -> np.ndarray:
        """Conditional variance V(mu) with unit dispersion."""
        mu = np.asarray(mu, dtype=float)
        if self.name == 'gaussian':
            return np.ones_like(mu)
        if self.name in ('bernoulli', 'binomial'):
            size = self._size()
            return mu * (size - mu) / size
        return mu

    def initial_mean(self, y: np.ndarray) -> np.ndarray:
        """Starting means for the PQL iteration."""
        y = np.asarray(y, dtype=float)
        if self.name == 'gaussian':
            return y.copy()
        if self.name in ('bernoulli', 'binomial'):
            size = self._size()
            return size * (y + 0.5) / (size + 1.0)
        return y + 0.1

    def validate_response(self, y: np.ndarray) -> None:
        """
        Check responses against the family's support.

        Raises:
            ValidationError: If any response is outside the support
        """
        y = np.asarray(y, dtype=float)
        if not np.all(np.isfinite(y)):
            raise ValidationError("Responses must be finite")

        if self.name == 'bernoulli':
            if not np.all((y == 0) | (y == 1)):
                raise ValidationError("Bernoulli responses must be 0 or 1")

        elif self.name == 'binomial':
            if self.trials is None or self.trials.shape != y.shape:
                raise ValidationError("Binomial responses need one trial count per subject")
            if np.any(self.trials < 1) or np.any(self.trials != np.round(self.trials)):
                raise ValidationError("Binomial trials must be positive integers")
            if np.any(y < 0) or np.any(y > self.trials) or np.any(y != np.round(y)):
                raise ValidationError("Binomial responses must be integers in [0, trials]")

        elif self.name == 'poisson':
            if np.any(y < 0) or np.any(y != np.round(y)):
                raise ValidationError("Poisson responses must be nonnegative integers")

    def sample(self, eta: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Draw responses given linear predictors (unit dispersion for gaussian)."""
        mu = self.inverse_link(eta)
        if self.name == 'gaussian':
            return rng.normal(mu, 1.0)
        if self.name == 'bernoulli':
            return rng.binomial(1, mu).astype(float)
        if self.name == 'binomial':
            return rng.binomial(self.trials.astype(int), mu / self.trials).astype(float)
        return rng.poisson(mu).astype(float)


def get_family(name: str, trials=None) -> Family:
    """
    Look up a family by name.

    Args:
        name: One of gaussian, bernoulli, binomial, poisson
        trials: Per-subject trial counts (binomial only)

    Returns:
        Family: The family
    """
    name = str(name).lower()
    if name not in ('gaussian', 'bernoulli', 'binomial', 'poisson'):
        raise ValidationError(f"Unsupported family: {name}")

    if name == 'binomial':
        if trials is None:
            raise ValidationError("The binomial family requires trial counts")
        trials = np.asarray(trials, dtype=float)
    else:
        trials = None

    return Family(name=name, trials=trials)
