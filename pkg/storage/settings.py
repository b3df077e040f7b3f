"""
Plain-text key = value settings files.

    # comment
    family = gaussian, bernoulli
    n = 100
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Union

from utils.errors import ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Setting:
    """A value together with the line it came from."""

    key: str
    value: str
    line: int

    def items(self) -> List[str]:
        """Comma-separated values, stripped, empties dropped."""
        return [part.strip() for part in self.value.split(',') if part.strip()]


def parse_settings(text: str) -> Dict[str, Setting]:
    """
    Parse settings text.

    Raises:
        ValidationError: On a malformed line, an empty key or value, or a repeated key
    """
    settings: Dict[str, Setting] = {}

    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue

        if '=' not in line:
            raise ValidationError(f"expected 'key = value', got {raw.strip()!r}", line=number)

        key, value = (part.strip() for part in line.split('=', 1))
        key = key.lower()
        if not key:
            raise ValidationError("missing key", line=number)
        if not value:
            raise ValidationError(f"missing value for {key}", line=number)
        if key in settings:
            raise ValidationError(
                f"{key} already set on line {settings[key].line}", line=number
            )

        settings[key] = Setting(key=key, value=value, line=number)

    return settings


def read_settings(path: Union[str, Path]) -> Dict[str, Setting]:
    """Read and parse a settings file."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"Settings file not found: {path}")
    settings = parse_settings(path.read_text(encoding='utf-8'))
    logger.info(f"Loaded {len(settings)} settings from {path}")
    return settings
