"""
Validators for the inputs of the engine.

Each function returns the validated value or raises a
:class:`~eddycorner.exceptions.DomainError` naming the offending argument.
"""
import math
from typing import Sequence

import numpy as np

from ..config import Config
from ..exceptions import DomainError

OMEGA_MIN = Config.OMEGA_MIN


def validate_omega(omega: float) -> float:
    """Opening angle of the conducting sector, strictly inside ``(0, 2 pi)``."""
    try:
        omega = float(omega)
    except (TypeError, ValueError) as e:
        raise DomainError(f'omega must be a number, got {omega!r}') from e
    if not OMEGA_MIN <= omega <= 2 * math.pi - OMEGA_MIN:
        raise DomainError(f'omega must lie in (0, 2 pi), got {omega}')
    return omega


def validate_positive(name: str, value: float) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError) as e:
        raise DomainError(f'{name} must be a number, got {value!r}') from e
    if not value > 0 or not math.isfinite(value):
        raise DomainError(f'{name} must be positive and finite, got {value}')
    return value


def validate_nonnegative_int(name: str, value: int) -> int:
    if isinstance(value, bool) or int(value) != value or value < 0:
        raise DomainError(f'{name} must be a nonnegative integer, got {value!r}')
    return int(value)


def validate_part(k: int, p: int) -> int:
    """Real (``p = 0``) or imaginary (``p = 1``) part; ``k = 0`` has no imaginary part."""
    if p not in (0, 1):
        raise DomainError(f'p must be 0 or 1, got {p!r}')
    if k == 0 and p == 1:
        raise DomainError('The singularity k=0 has no p=1 part')
    return p


def validate_radii(radii: Sequence[float], r_max: float = math.inf) -> np.ndarray:
    """Distinct positive radii not exceeding ``r_max``, as a float array."""
    radii = np.asarray(radii, dtype=float).ravel()
    if radii.size == 0:
        raise DomainError('At least one radius is required')
    if np.any(~np.isfinite(radii)) or np.any(radii <= 0) or np.any(radii > r_max):
        raise DomainError(f'Radii must lie in (0, {r_max}]')
    return radii
