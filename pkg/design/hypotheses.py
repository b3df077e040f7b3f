"""
Hypotheses on the coefficient shape and the test methods.
"""
from enum import Enum

from utils.errors import ValidationError


class Hypothesis(str, Enum):
    """Shape hypotheses, each tested through a single variance component."""

    NULLITY = 'nullity'
    FUNCTIONALITY = 'functionality'
    LINEARITY = 'linearity'

    @property
    def order(self) -> int:
        """Difference-penalty order whose null space is the hypothesized shape."""
        return {'nullity': 0, 'functionality': 1, 'linearity': 2}[self.value]

    @classmethod
    def from_order(cls, order: int) -> 'Hypothesis':
        for hypothesis in cls:
            if hypothesis.order == order:
                return hypothesis
        raise ValidationError(f"No hypothesis for penalty order {order}")

    @classmethod
    def parse(cls, value) -> 'Hypothesis':
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            choices = ', '.join(h.value for h in cls)
            raise ValidationError(f"Unknown hypothesis '{value}' (choose from {choices})") from None


class Method(str, Enum):
    """Variance-component test methods."""

    RLRT = 'aRLRT'
    SCORE = 'aScore'

    @classmethod
    def parse(cls, value) -> 'Method':
        if isinstance(value, cls):
            return value
        lookup = {method.value.lower(): method for method in cls}
        lookup.update({method.name.lower(): method for method in cls})
        key = str(value).strip().lower()
        if key not in lookup:
            choices = ', '.join(m.value for m in cls)
            raise ValidationError(f"Unknown method '{value}' (choose from {choices})")
        return lookup[key]
