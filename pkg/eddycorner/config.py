import math
import os
from typing import Any, Dict

from .utils.config import get_bool_env, get_float_env, get_int_env


class Config:
    # Term algebra
    PRUNE_RELATIVE = get_float_env('EDDYCORNER_PRUNE_RELATIVE', 1e-14)

    # Shadow engine
    JUMP_TOLERANCE = get_float_env('EDDYCORNER_JUMP_TOLERANCE', 1e-11)
    OMEGA_MIN = 1e-3

    # Quadrature on circles r = R
    QUAD_NODES = get_int_env('EDDYCORNER_QUAD_NODES', 16)
    QUAD_TOLERANCE = get_float_env('EDDYCORNER_QUAD_TOLERANCE', 1e-10)
    QUAD_MAX_DOUBLINGS = get_int_env('EDDYCORNER_QUAD_MAX_DOUBLINGS', 10)

    # Polar-grid reference solver
    SOLVER_N_R = get_int_env('EDDYCORNER_SOLVER_N_R', 256)
    SOLVER_N_THETA = get_int_env('EDDYCORNER_SOLVER_N_THETA', 256)
    SOLVER_GRADING = get_float_env('EDDYCORNER_SOLVER_GRADING', 1.03)
    SOLVER_R_MIN_FRACTION = get_float_env('EDDYCORNER_SOLVER_R_MIN_FRACTION', 1e-5)
    SOLVER_RESIDUAL_TOLERANCE = 1e-10
    RUN_SLOW_CHECKS = get_bool_env('EDDYCORNER_RUN_SLOW')

    # R sweeps
    SWEEP_POINTS = get_int_env('EDDYCORNER_SWEEP_POINTS', 20)
    SWEEP_R_MAX_FRACTION = 0.4
    SWEEP_R_MIN_FRACTION = 1e-4

    # Default physics: the disk test problem
    OMEGA = math.pi / 4
    ZETA = 1000.0 / (5.0 * math.sqrt(2.0))  # 1/(5 sqrt 2) per mm, in 1/m
    R_DOMAIN = 0.05
    R_SMALL = 5e-5

    # Output
    basedir = os.path.abspath(os.path.dirname(os.path.dirname(__file__)))
    OUTPUT_DIR = os.environ.get('EDDYCORNER_OUTPUT_DIR', os.path.join(basedir, 'output'))

    # Logging configuration
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO')
    LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    LOG_FILE = os.environ.get('LOG_FILE', os.path.join(basedir, 'logs', 'eddycorner.log'))

    @classmethod
    def as_dict(cls) -> Dict[str, Any]:
        """Return the upper-case settings of this configuration."""
        return {name: getattr(cls, name) for name in dir(cls) if name.isupper()}


class DevelopmentConfig(Config):
    """Development configuration."""
    LOG_LEVEL = 'DEBUG'


class TestingConfig(Config):
    """Testing configuration."""
    TESTING = True
    LOG_LEVEL = 'CRITICAL'  # Suppress logging during tests
    LOG_FILE = ''
    SOLVER_N_R = 64
    SOLVER_N_THETA = 64
    SWEEP_POINTS = 8


class ReproductionConfig(Config):
    """Settings of the published disk experiment."""
    SOLVER_N_R = 512
    SOLVER_N_THETA = 512
    SWEEP_POINTS = 20


# Configuration dictionary
config: Dict[str, Any] = {
    'development': DevelopmentConfig,
    'testing': TestingConfig,
    'reproduction': ReproductionConfig,
    'default': Config
}
