"""
CSV and JSON records.

Curves are long-format `id,t,x` rows (unobserved points are absent rows), responses are
`id,y[,trials]` rows, tabulated coefficients are `t,beta` rows. Results are JSON with
sorted keys so identical inputs give identical bytes.
"""
import json
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from fpca.dataset import FunctionalDataset, Subject
from storage.files import atomic_write
from utils.errors import DataFormatError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

CURVE_COLUMNS = ['id', 't', 'x']
RESPONSE_COLUMNS = ['id', 'y']
COEFFICIENT_COLUMNS = ['t', 'beta']
EXPERIMENT_COLUMNS = [
    'family', 'hypothesis', 'method', 'n', 'm_i', 'coefficient', 'delta',
    'replicates', 'rejections', 'rate', 'se', 'converged_rate', 'nonconverged',
]


def _read_csv(path: PathLike, required: List[str]) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"File not found: {path}")

    try:
        frame = pd.read_csv(path, dtype={'id': str}, float_precision='round_trip')
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataFormatError(f"Could not parse {path}: {e}") from e

    frame.columns = [str(column).strip() for column in frame.columns]
    missing = [column for column in required if column not in frame.columns]
    if missing:
        raise DataFormatError(f"{path.name} is missing columns: {', '.join(missing)}")

    numeric = [column for column in frame.columns if column != 'id']
    for column in numeric:
        values = pd.to_numeric(frame[column], errors='coerce')
        bad = values.isna() | ~np.isfinite(values.to_numpy(dtype=float, na_value=np.nan))
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0]) + 2
            raise DataFormatError(f"{path.name} row {row}: non-numeric or missing {column}")
        frame[column] = values.astype(float)

    if 'id' in frame.columns:
        if frame['id'].isna().any():
            row = int(np.flatnonzero(frame['id'].isna().to_numpy())[0]) + 2
            raise DataFormatError(f"{path.name} row {row}: missing id")
        frame['id'] = frame['id'].str.strip()

    return frame


def read_curves(path: PathLike) -> pd.DataFrame:
    """Read a long-format curve file; (id, t) pairs must be unique."""
    frame = _read_csv(path, CURVE_COLUMNS)[CURVE_COLUMNS]
    duplicated = frame.duplicated(subset=['id', 't'])
    if duplicated.any():
        first = frame[duplicated].iloc[0]
        raise DataFormatError(f"Duplicate observation for id {first['id']} at t={first['t']}")
    return frame


def read_responses(path: PathLike) -> pd.DataFrame:
    """Read a response file; each id appears once."""
    frame = _read_csv(path, RESPONSE_COLUMNS)
    duplicated = frame['id'].duplicated()
    if duplicated.any():
        raise DataFormatError(f"Duplicate response for id {frame.loc[duplicated, 'id'].iloc[0]}")
    return frame


def _describe(ids: Iterable[str]) -> str:
    ids = sorted(ids)
    shown = ', '.join(ids[:5])
    return shown + (f" and {len(ids) - 5} more" if len(ids) > 5 else '')


def _subjects(curves: pd.DataFrame) -> List[Subject]:
    """Subjects in order of first appearance, each sorted by t."""
    subjects = []
    for subject_id, rows in curves.groupby('id', sort=False):
        rows = rows.sort_values('t')
        subjects.append(Subject(str(subject_id), rows['t'].to_numpy(), rows['x'].to_numpy()))
    return subjects


def load_dataset(curves_path: PathLike, responses_path: PathLike, family: str) -> FunctionalDataset:
    """
    Load curves and responses into a dataset.

    Subjects keep the order of first appearance in the curve file; the common grid is the
    sorted set of all observed t.

    Raises:
        DataFormatError: On unparseable files or ids that do not align
        ValidationError: When responses violate the family's constraints
    """
    curves = read_curves(curves_path)
    responses = read_responses(responses_path)

    curve_ids = list(pd.unique(curves['id']))
    response_ids = set(responses['id'])
    missing = set(curve_ids) - response_ids
    extra = response_ids - set(curve_ids)
    if missing:
        raise DataFormatError(f"No response for ids: {_describe(missing)}")
    if extra:
        raise DataFormatError(f"Responses without curves for ids: {_describe(extra)}")

    if family == 'binomial' and 'trials' not in responses.columns:
        raise DataFormatError("The binomial family needs a trials column in the response file")

    grid = np.unique(curves['t'].to_numpy())
    subjects = _subjects(curves)

    responses = responses.set_index('id').loc[curve_ids]
    trials = responses['trials'].to_numpy() if family == 'binomial' else None

    data = FunctionalDataset(
        subjects=subjects,
        common_grid=grid,
        responses=responses['y'].to_numpy(),
        family=family,
        trials=trials,
    )
    logger.info(
        f"Loaded {data.n} subjects, {data.total_observations} observations on a "
        f"{data.m}-point grid ({family})"
    )
    return data


def write_dataset(data: FunctionalDataset, curves_path: PathLike, responses_path: PathLike) -> None:
    """Write a dataset as curve and response files."""
    curves = pd.DataFrame({
        'id': np.concatenate([[s.subject_id] * s.grid.size for s in data.subjects]),
        't': np.concatenate([s.grid for s in data.subjects]),
        'x': np.concatenate([s.values for s in data.subjects]),
    })
    responses = pd.DataFrame({'id': data.ids, 'y': data.responses})
    if data.trials is not None:
        responses['trials'] = data.trials.astype(int)

    with atomic_write(curves_path) as handle:
        curves.to_csv(handle, index=False)
    with atomic_write(responses_path) as handle:
        responses.to_csv(handle, index=False)
    logger.info(f"Wrote {data.n} subjects to {curves_path} and {responses_path}")


def read_coefficient(path: PathLike) -> Tuple[np.ndarray, np.ndarray]:
    """Read a tabulated coefficient function as (grid, beta) sorted by t."""
    frame = _read_csv(path, COEFFICIENT_COLUMNS).sort_values('t')
    if frame['t'].duplicated().any():
        raise DataFormatError(f"Duplicate t values in {Path(path).name}")
    if len(frame) < 2:
        raise DataFormatError(f"{Path(path).name} needs at least two rows")
    return frame['t'].to_numpy(), frame['beta'].to_numpy()


def write_coefficient(grid: np.ndarray, beta: np.ndarray, path: PathLike) -> None:
    with atomic_write(path) as handle:
        pd.DataFrame({'t': grid, 'beta': beta}).to_csv(handle, index=False)


def dumps_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + '\n'


def write_json(payload: dict, path: Optional[PathLike] = None) -> str:
    """Serialize payload; write it to path when given. Returns the text."""
    text = dumps_json(payload)
    if path is not None:
        with atomic_write(path) as handle:
            handle.write(text)
        logger.info(f"Wrote {path}")
    return text


def experiment_frame(rows: List[dict]) -> pd.DataFrame:
    """Experiment rows as a frame with the standard column order."""
    frame = pd.DataFrame(rows)
    for column in EXPERIMENT_COLUMNS:
        if column not in frame.columns:
            frame[column] = np.nan
    return frame[EXPERIMENT_COLUMNS]


def write_experiment_csv(rows: List[dict], path: PathLike) -> None:
    with atomic_write(path) as handle:
        experiment_frame(rows).to_csv(handle, index=False)
    logger.info(f"Wrote {len(rows)} experiment rows to {path}")


def load_curves(curves_path: PathLike) -> FunctionalDataset:
    """Load curves alone, with placeholder gaussian responses, for FPCA."""
    curves = read_curves(curves_path)
    subjects = _subjects(curves)
    return FunctionalDataset(
        subjects=subjects,
        common_grid=np.unique(curves['t'].to_numpy()),
        responses=np.zeros(len(subjects)),
    )
