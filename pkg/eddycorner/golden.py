"""
Closed real forms of the first shadows, written directly in ``(r, theta)``.

These formulas are independent of the term algebra and serve as the
reference against which the recursive engine is checked.
"""
import math
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike

from .exceptions import DomainError
from .utils.validators import validate_omega, validate_part

MinusForm = Callable[[np.ndarray, np.ndarray], np.ndarray]
PlusForm = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def _on_sectors(minus: MinusForm, plus: PlusForm, r: ArrayLike, theta: ArrayLike,
                omega: float) -> np.ndarray:
    r, theta = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(theta, dtype=float))
    if np.any(np.abs(theta) > math.pi + 1e-12):
        raise DomainError('theta must lie in [-pi, pi]')
    if np.any(r <= 0):
        raise DomainError('The closed forms need r > 0')
    # theta_+ = theta - pi sgn(theta), with theta = 0 never on the plus side
    theta_plus = np.where(theta > 0, theta - math.pi, theta + math.pi)
    out = np.where(np.abs(theta) <= omega / 2, minus(r, theta), plus(r, theta, theta_plus))
    return out if out.ndim else float(out)


def primal_first_shadow(k: int, p: int, omega: float, r: ArrayLike, theta: ArrayLike) -> np.ndarray:
    """
    First shadow of ``Re z^k`` (``p = 0``) or ``Im z^k`` (``p = 1``).

    Valid for any integer ``k`` other than ``-1`` and ``-2``; negative ``k``
    give the dual forms up to normalization.
    """
    omega = validate_omega(omega)
    if p not in (0, 1):
        raise DomainError(f'p must be 0 or 1, got {p!r}')
    if k in (-1, -2):
        raise DomainError(f'k={k} has its own closed form')
    lam = k + 2
    s, c = math.sin(omega), math.cos(omega)
    sign = 1 if p == 0 else -1
    log_coeff = ((k + 1) * s + sign * math.sin((k + 1) * omega)) / (math.pi * (k + 1) * lam)
    trig = np.cos if p == 0 else np.sin

    def log_part(r, angle, theta):
        lr = np.log(r)
        if p == 0:
            return r ** lam * (lr * np.cos(lam * theta) - angle * np.sin(lam * theta))
        return r ** lam * (lr * np.sin(lam * theta) + angle * np.cos(lam * theta))

    def minus(r, theta):
        return (log_coeff * log_part(r, theta, theta)
                + r ** lam * (trig(k * theta) / (k + 1) - c * trig(lam * theta) / lam))

    def plus(r, theta, theta_plus):
        return (log_coeff * log_part(r, theta_plus, theta)
                + sign * r ** lam * math.cos((k + 1) * omega) * trig(lam * theta) / ((k + 1) * lam))

    return _on_sectors(minus, plus, r, theta, omega)


def dual_first_shadow(k: int, p: int, omega: float, r: ArrayLike, theta: ArrayLike) -> np.ndarray:
    """
    First shadow of the dual singularity: ``Re z^-k / (2k pi)``, ``-Im z^-k / (2k pi)``
    or ``-log r / (2 pi)`` for ``k = 0``.
    """
    omega = validate_omega(omega)
    validate_part(k, p)
    if k < 0:
        raise DomainError(f'Dual singularities need k >= 0, got {k}')
    s, c = math.sin(omega), math.cos(omega)
    pi = math.pi

    if k >= 3:
        factor = 1.0 / (2 * k * pi) if p == 0 else -1.0 / (2 * k * pi)
        return factor * primal_first_shadow(-k, p, omega, r, theta)

    if k == 1 and p == 0:
        def minus(r, t):
            lr = np.log(r)
            return ((s + omega - pi) / pi * r * (lr * np.cos(t) - t * np.sin(t))
                    - c * r * np.cos(t) + r * (lr * np.cos(t) + t * np.sin(t))) / (2 * pi)

        def plus(r, t, tp):
            lr = np.log(r)
            return ((s + omega) / pi * r * (lr * np.cos(t) - tp * np.sin(t)) - r * np.cos(t)) / (2 * pi)

    elif k == 1:
        def minus(r, t):
            lr = np.log(r)
            return -((s - omega + pi) / pi * r * (lr * np.sin(t) + t * np.cos(t))
                     - c * r * np.sin(t) - r * (lr * np.sin(t) - t * np.cos(t))) / (2 * pi)

        def plus(r, t, tp):
            lr = np.log(r)
            return -((s - omega) / pi * r * (lr * np.sin(t) + tp * np.cos(t)) + r * np.sin(t)) / (2 * pi)

    elif k == 2 and p == 0:
        beta = (s + (2 * pi - omega) * c) / pi

        def minus(r, t):
            lr = np.log(r)
            return (s / pi * (lr ** 2 - t ** 2) - beta * lr - np.cos(2 * t)) / (4 * pi)

        def plus(r, t, tp):
            lr = np.log(r)
            return (s / pi * (lr ** 2 - tp ** 2) - beta * lr - c + (pi - omega) * s) / (4 * pi)

    elif k == 2:
        def minus(r, t):
            return ((s + (2 * pi - omega) * c) / pi * t - np.sin(2 * t)) / (4 * pi)

        def plus(r, t, tp):
            return (s - omega * c) / pi * tp / (4 * pi)

    else:
        def minus(r, t):
            lr = np.log(r)
            r2 = r ** 2
            return -(s / (2 * pi) * r2 * (np.cos(2 * t) * (lr ** 2 - t ** 2) - 2 * t * np.sin(2 * t) * lr)
                     + ((omega - 2 * pi) * c - 2 * s) / (2 * pi) * r2 * (np.cos(2 * t) * lr - t * np.sin(2 * t))
                     + (c - pi * s) / 4 * r2 * np.cos(2 * t)
                     + r2 * lr - r2) / (2 * pi)

        def plus(r, t, tp):
            lr = np.log(r)
            r2 = r ** 2
            return -(s / (2 * pi) * r2 * (np.cos(2 * t) * (lr ** 2 - tp ** 2) - 2 * tp * np.sin(2 * t) * lr)
                     + (omega * c - 2 * s) / (2 * pi) * r2 * (np.cos(2 * t) * lr - tp * np.sin(2 * t))
                     - (3 * c + (2 * omega - pi) * s) / 4 * r2 * np.cos(2 * t)) / (2 * pi)

    return _on_sectors(minus, plus, r, theta, omega)
