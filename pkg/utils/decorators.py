"""
Utility decorators for pipeline stages.
Provides stage logging with timing and finiteness checks on numerical results.

"""
import logging
import time
from functools import wraps

import numpy as np

from utils.errors import ConvergenceError

logger = logging.getLogger(__name__)


def log_stage(name: str):
    """
    Decorator to log entry, duration and failure of a pipeline stage.

    Args:
        name: Stage name used in log messages

    Usage:
        @log_stage('fpca')
        def fit_fpca(data, ...):
            ...
    """
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            started = time.perf_counter()
            logger.debug(f"Stage '{name}' started ({func.__name__})")

            try:
                result = func(*args, **kwargs)
            except Exception as e:
                elapsed = time.perf_counter() - started
                logger.warning(f"Stage '{name}' failed after {elapsed:.3f}s: {e}")
                raise

            elapsed = time.perf_counter() - started
            logger.debug(f"Stage '{name}' finished in {elapsed:.3f}s")
            return result

        return wrapper
    return decorator


def finite_result(func):
    """
    Decorator to reject non-finite numerical output.
    Tuples are checked element-wise; non-numeric members are skipped.
    """
    @wraps(func)
    def wrapper(*args, **kwargs):
        result = func(*args, **kwargs)
        values = result if isinstance(result, tuple) else (result,)

        for value in values:
            if isinstance(value, (float, int, np.ndarray, np.floating)):
                if not np.all(np.isfinite(value)):
                    logger.error(f"{func.__name__} produced non-finite output")
                    raise ConvergenceError(f"{func.__name__} produced non-finite output")

        return result

    return wrapper
