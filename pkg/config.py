"""
Configuration management for flmtest.
Loads and validates environment variables.
"""
import os
import logging
from typing import List
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)


class Config:
    """Application configuration with validation."""

    VERSION: str = '1.0.0'

    LOG_LEVEL: str = os.getenv('FLMTEST_LOG_LEVEL', 'INFO')
    LOG_DIR: str = os.getenv('FLMTEST_LOG_DIR', 'logs')

    NUM_BASIS: int = int(os.getenv('FLMTEST_NUM_BASIS', '30'))
    SPLINE_DEGREE: int = int(os.getenv('FLMTEST_SPLINE_DEGREE', '3'))
    QUADRATURE_REFINE: int = int(os.getenv('FLMTEST_QUADRATURE_REFINE', '1'))
    KX_SCAN_MAX: int = int(os.getenv('FLMTEST_KX_SCAN_MAX', '20'))

    PQL_MAX_ITER: int = int(os.getenv('FLMTEST_PQL_MAX_ITER', '200'))
    PQL_TOL: float = float(os.getenv('FLMTEST_PQL_TOL', '1e-6'))

    NULL_DRAWS: int = int(os.getenv('FLMTEST_NULL_DRAWS', '10000'))
    NULL_CONDITIONING: str = os.getenv('FLMTEST_NULL_CONDITIONING', 'alternative')
    RLRT_MODE: str = os.getenv('FLMTEST_RLRT_MODE', 'single')

    SEED: int = int(os.getenv('FLMTEST_SEED', '20190101'))
    THREADS: int = int(os.getenv('FLMTEST_THREADS', '1'))
    ALPHA: float = float(os.getenv('FLMTEST_ALPHA', '0.05'))

    SUPPORTED_FAMILIES: List[str] = ['gaussian', 'bernoulli', 'binomial', 'poisson']
    NULL_CONDITIONING_CHOICES: List[str] = ['alternative', 'null']
    RLRT_MODE_CHOICES: List[str] = ['single', 'two_fit']

    @classmethod
    def validate(cls) -> bool:
        """Validate critical configuration values."""
        if cls.SPLINE_DEGREE < 1:
            logger.error(f"Invalid FLMTEST_SPLINE_DEGREE: {cls.SPLINE_DEGREE}")
            return False

        if cls.NUM_BASIS < cls.SPLINE_DEGREE + 1:
            logger.error(
                f"FLMTEST_NUM_BASIS={cls.NUM_BASIS} too small for degree {cls.SPLINE_DEGREE}"
            )
            return False

        if cls.NULL_DRAWS < 1:
            logger.error(f"Invalid FLMTEST_NULL_DRAWS: {cls.NULL_DRAWS}")
            return False

        if not 0.0 < cls.ALPHA < 1.0:
            logger.error(f"Invalid FLMTEST_ALPHA: {cls.ALPHA}")
            return False

        if cls.NULL_CONDITIONING not in cls.NULL_CONDITIONING_CHOICES:
            logger.error(f"Invalid FLMTEST_NULL_CONDITIONING: {cls.NULL_CONDITIONING}")
            return False

        if cls.RLRT_MODE not in cls.RLRT_MODE_CHOICES:
            logger.error(f"Invalid FLMTEST_RLRT_MODE: {cls.RLRT_MODE}")
            return False

        if cls.QUADRATURE_REFINE < 1:
            logger.error(f"Invalid FLMTEST_QUADRATURE_REFINE: {cls.QUADRATURE_REFINE}")
            return False

        if cls.THREADS < 1:
            logger.warning(f"FLMTEST_THREADS={cls.THREADS} is below 1, using 1")
            cls.THREADS = 1

        if cls.PQL_TOL > 1e-3:
            logger.warning(f"Unusually loose PQL tolerance: {cls.PQL_TOL}")

        if cls.NULL_DRAWS < 1000:
            logger.warning(f"Only {cls.NULL_DRAWS} null draws, p-values will be coarse")

        return True

    @classmethod
    def log_path(cls, name: str) -> Path:
        """Get a log file path, creating the log directory when needed."""
        log_dir = Path(cls.LOG_DIR)
        log_dir.mkdir(parents=True, exist_ok=True)
        return log_dir / name

    @classmethod
    def as_dict(cls) -> dict:
        """Get the resolved environment-level settings."""
        return {
            'version': cls.VERSION,
            'num_basis': cls.NUM_BASIS,
            'spline_degree': cls.SPLINE_DEGREE,
            'quadrature_refine': cls.QUADRATURE_REFINE,
            'kx_scan_max': cls.KX_SCAN_MAX,
            'pql_max_iter': cls.PQL_MAX_ITER,
            'pql_tol': cls.PQL_TOL,
            'null_draws': cls.NULL_DRAWS,
            'null_conditioning': cls.NULL_CONDITIONING,
            'rlrt_mode': cls.RLRT_MODE,
            'seed': cls.SEED,
            'threads': cls.THREADS,
            'alpha': cls.ALPHA,
        }


if not Config.validate():
    logger.warning("Configuration validation failed - results may not be reliable")
