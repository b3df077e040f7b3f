"""
Expansion of a settings file into simulation cells.

List-valued keys (family, coefficient, delta, n, m_i, hypothesis, method) are crossed;
scalar keys apply to every cell. All cells share the master seed, so cells that differ
only in delta or method see the same replicate datasets.
"""
import itertools
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional

from design import Hypothesis, Method
from harness.simulation import COEFFICIENT_FORMS, SimConfig
from storage.records import read_coefficient
from storage.settings import Setting
from utils.errors import FlmTestError, ValidationError

logger = logging.getLogger(__name__)

LIST_KEYS = ('family', 'coefficient', 'delta', 'n', 'm_i', 'hypothesis', 'method', 'eigenvalues')
SCALAR_KEYS = (
    'replicates', 'null_draws', 'seed', 'alpha', 'noise_var', 'grid_size', 'trials',
    'coefficient_file',
)


@dataclass(frozen=True)
class ExperimentCell:
    config: SimConfig
    method: Method
    hypothesis: Hypothesis


def _convert(setting: Setting, cast: Callable, many: bool):
    try:
        values = [cast(item) for item in setting.items()]
    except (ValueError, FlmTestError) as e:
        raise ValidationError(f"invalid {setting.key}: {e}", line=setting.line) from None
    if not values:
        raise ValidationError(f"missing value for {setting.key}", line=setting.line)
    if not many and len(values) > 1:
        raise ValidationError(f"{setting.key} takes a single value", line=setting.line)
    return values if many else values[0]


def _integer(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError(f"{text} is not an integer")
    return int(value)


def _choices(options) -> Callable:
    def cast(text: str) -> str:
        text = text.lower()
        if text not in options:
            raise ValueError(f"{text} (choose from {', '.join(options)})")
        return text
    return cast


def _expand(
    setting: Optional[Setting],
    cast: Callable,
    everything: List,
    default: Optional[List] = None,
) -> List:
    """Values of a list setting; 'all' gives everything, a missing key gives default."""
    if setting is None:
        return everything if default is None else default
    if setting.value.strip().lower() == 'all':
        return everything
    return _convert(setting, cast, many=True)


def build_plan(
    settings: Dict[str, Setting],
    seed: Optional[int] = None,
    base_dir: Optional[Path] = None,
) -> List[ExperimentCell]:
    """
    Cross the list-valued settings into experiment cells.

    Args:
        settings: Parsed settings
        seed: Master seed overriding the settings file
        base_dir: Directory that relative coefficient_file paths resolve against

    Returns:
        List[ExperimentCell]: Cells in family, coefficient, delta, n, m_i, hypothesis,
        method order

    Raises:
        ValidationError: With the offending line number
    """
    unknown = [s for key, s in settings.items() if key not in LIST_KEYS + SCALAR_KEYS]
    if unknown:
        raise ValidationError(f"unknown setting {unknown[0].key}", line=unknown[0].line)

    def get(key, cast, default, many=False):
        return _convert(settings[key], cast, many) if key in settings else default

    families = get('family', _choices(('gaussian', 'bernoulli', 'binomial', 'poisson')), ['gaussian'], True)
    forms = get('coefficient', _choices(COEFFICIENT_FORMS), ['scalar'], True)
    deltas = get('delta', float, [0.0], True)
    sizes = get('n', _integer, [100], True)
    grid_size = get('grid_size', _integer, 80)
    counts = get('m_i', _integer, [grid_size], True)
    hypotheses = _expand(settings.get('hypothesis'), Hypothesis.parse, list(Hypothesis))
    methods = _expand(settings.get('method'), Method.parse, list(Method), default=[Method.RLRT])

    shared = {
        'grid_size': grid_size,
        'replicates': get('replicates', _integer, 100),
        'null_draws': get('null_draws', _integer, SimConfig.null_draws),
        'seed': seed if seed is not None else get('seed', _integer, SimConfig.seed),
        'alpha': get('alpha', float, SimConfig.alpha),
        'noise_var': get('noise_var', float, SimConfig.noise_var),
        'trials': get('trials', _integer, SimConfig.trials),
    }
    if 'eigenvalues' in settings:
        shared['eigenvalues'] = tuple(get('eigenvalues', float, None, True))

    if 'tabulated' in forms:
        if 'coefficient_file' not in settings:
            line = settings['coefficient'].line
            raise ValidationError("a tabulated coefficient needs coefficient_file", line=line)
        setting = settings['coefficient_file']
        path = Path(setting.value)
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        try:
            beta_grid, beta_values = read_coefficient(path)
        except FlmTestError as e:
            raise ValidationError(str(e), line=setting.line) from None
        shared['beta_grid'] = tuple(float(t) for t in beta_grid)
        shared['beta_values'] = tuple(float(b) for b in beta_values)

    for m_i in counts:
        if not 1 <= m_i <= grid_size:
            line = settings['m_i'].line if 'm_i' in settings else None
            raise ValidationError(f"m_i must lie in [1, {grid_size}], got {m_i}", line=line)

    cells = []
    for family, form, delta, n, m_i in itertools.product(families, forms, deltas, sizes, counts):
        try:
            config = SimConfig(family=family, coefficient=form, delta=delta, n=n, m_i=m_i, **shared)
        except ValidationError as e:
            raise ValidationError(f"invalid cell ({family}, {form}, delta={delta}, n={n}, m_i={m_i}): {e}") from None
        for hypothesis in hypotheses:
            for method in methods:
                cells.append(ExperimentCell(config=config, method=method, hypothesis=hypothesis))

    logger.info(f"Simulation plan has {len(cells)} cell(s)")
    return cells
