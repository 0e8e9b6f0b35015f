"""
Exact algebra of sector-wise complex monomials with logarithms.

A :class:`Term` stands for ``coeff * v**a * conj(v)**b * log(v)**q * log(conj v)**s``
where ``v`` is the local complex variable of its sector: ``z`` on the
conducting sector ``S-`` (``|theta| < omega/2``) and ``z+ = -z`` on the
complement ``S+``. Both logarithms are principal, so on ``S+`` the angle of
``z+`` is ``theta - pi`` for ``theta`` in ``(0, pi]`` and ``theta + pi`` for
``theta`` in ``[-pi, 0)``.

Every operation of the shadow recursion (derivatives, antiderivatives,
traces on the rays ``theta = +-omega/2``) is closed on sums of such terms and
is carried out here without discretization.
"""
import enum
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial
from typing_extensions import TypeAlias

from .config import Config
from .exceptions import (
    DomainError, MixedLogError, SectorMismatchError, SingularEvaluationError
)

logger = logging.getLogger(__name__)

#: Terms smaller than this fraction of the largest coefficient are dropped.
PRUNE_RELATIVE = Config.PRUNE_RELATIVE

#: Slack allowed when deciding on which side of a ray an angle lies.
ANGLE_SLACK = 1e-12

Key: TypeAlias = Tuple[int, int, int, int]
ArrayLike: TypeAlias = Union[float, Sequence[float], np.ndarray]


class Sector(str, enum.Enum):
    """The two sectors meeting at the corner."""
    MINUS = 'minus'
    PLUS = 'plus'


class Variable(str, enum.Enum):
    """Differentiation and integration variable: ``v`` or ``conj(v)``."""
    VAR = 'var'
    CONJ = 'conj'


class Ray(enum.Enum):
    """The two rays of the interface, ``theta = +omega/2`` and ``theta = -omega/2``."""
    PLUS_OMEGA_HALF = 1
    MINUS_OMEGA_HALF = -1

    @property
    def sign(self) -> int:
        return self.value


RAYS = (Ray.PLUS_OMEGA_HALF, Ray.MINUS_OMEGA_HALF)


@dataclass(frozen=True)
class Term:
    """One monomial ``coeff * v^a * conj(v)^b * log^q(v) * log^s(conj v)``."""
    sector: Sector
    coeff: complex
    a: int
    b: int
    q: int = 0
    s: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'sector', Sector(self.sector))
        object.__setattr__(self, 'coeff', complex(self.coeff))
        if self.q < 0 or self.s < 0:
            raise DomainError(f'Log powers must be nonnegative, got q={self.q}, s={self.s}')
        if self.q and self.s:
            raise MixedLogError(
                f'Term would carry log(v)^{self.q} * log(conj v)^{self.s}'
            )

    @property
    def key(self) -> Key:
        return (self.a, self.b, self.q, self.s)

    @property
    def degree(self) -> int:
        return self.a + self.b

    @property
    def log_power(self) -> int:
        return max(self.q, self.s)


def _sort_key(key: Key) -> Tuple[int, int, int, int]:
    a, b, q, s = key
    return (-a, b, -q, -s)


def _check_key(key: Key) -> None:
    if key[2] < 0 or key[3] < 0:
        raise DomainError(f'Log powers must be nonnegative in {key}')
    if key[2] and key[3]:
        raise MixedLogError(f'Term would carry log(v)^{key[2]} * log(conj v)^{key[3]}')


class TermSum:
    """
    Canonical linear combination of terms attached to one sector.

    Instances are immutable. Coefficients of equal monomials are merged, the
    terms are kept in the order ``a`` descending, ``b`` ascending, ``q``
    descending, ``s`` descending, and terms whose modulus is below
    ``prune`` times the largest modulus are discarded.
    """

    __slots__ = ('_sector', '_coeffs')

    def __init__(self, sector: Union[Sector, str],
                 coeffs: Optional[Mapping[Key, complex]] = None,
                 prune: float = PRUNE_RELATIVE):
        self._sector = Sector(sector)
        merged: Dict[Key, complex] = {}
        for key, value in (coeffs or {}).items():
            key = tuple(int(k) for k in key)
            _check_key(key)
            merged[key] = merged.get(key, 0j) + complex(value)
        self._coeffs = _canonical(merged, prune)

    @classmethod
    def zero(cls, sector: Union[Sector, str]) -> 'TermSum':
        return cls(sector)

    @classmethod
    def monomial(cls, sector: Union[Sector, str], coeff: complex, a: int, b: int,
                 q: int = 0, s: int = 0) -> 'TermSum':
        """Build the one-term sum ``coeff * v^a conj(v)^b log^q v log^s conj(v)``."""
        return cls(sector, {(a, b, q, s): coeff})

    @classmethod
    def from_terms(cls, terms: Iterable[Term], sector: Optional[Union[Sector, str]] = None,
                   prune: float = PRUNE_RELATIVE) -> 'TermSum':
        """
        Merge terms into a canonical sum.

        Raises:
            SectorMismatchError: If the terms belong to different sectors
        """
        merged: Dict[Key, complex] = {}
        for term in terms:
            if sector is None:
                sector = term.sector
            elif Sector(sector) != term.sector:
                raise SectorMismatchError(
                    f'Cannot merge a {term.sector.value} term into a {Sector(sector).value} sum'
                )
            merged[term.key] = merged.get(term.key, 0j) + term.coeff
        if sector is None:
            raise DomainError('A sector is required to build an empty sum')
        return cls(sector, merged, prune)

    @property
    def sector(self) -> Sector:
        return self._sector

    @property
    def terms(self) -> Tuple[Term, ...]:
        return tuple(Term(self._sector, c, *key) for key, c in self._coeffs.items())

    def items(self) -> Iterator[Tuple[Key, complex]]:
        return iter(self._coeffs.items())

    def coefficient(self, a: int, b: int, q: int = 0, s: int = 0) -> complex:
        return self._coeffs.get((a, b, q, s), 0j)

    @property
    def degrees(self) -> Tuple[int, ...]:
        return tuple(sorted({key[0] + key[1] for key in self._coeffs}))

    @property
    def homogeneity(self) -> Optional[int]:
        """The common degree ``a + b`` of all terms, or None if empty or mixed."""
        degrees = self.degrees
        return degrees[0] if len(degrees) == 1 else None

    @property
    def log_degree(self) -> int:
        return max((max(key[2], key[3]) for key in self._coeffs), default=0)

    @property
    def magnitude(self) -> float:
        return max((abs(c) for c in self._coeffs.values()), default=0.0)

    def is_close(self, other: 'TermSum', tol: float) -> bool:
        """True when every coefficient of ``self - other`` is at most ``tol`` in modulus."""
        diff = combine([(1.0, self), (-1.0, other)], prune=0.0)
        return diff.magnitude <= tol

    def __iter__(self) -> Iterator[Term]:
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self._coeffs)

    def __bool__(self) -> bool:
        return bool(self._coeffs)

    def __add__(self, other: 'TermSum') -> 'TermSum':
        return combine([(1.0, self), (1.0, other)])

    def __sub__(self, other: 'TermSum') -> 'TermSum':
        return combine([(1.0, self), (-1.0, other)])

    def __neg__(self) -> 'TermSum':
        return TermSum(self._sector, {k: -c for k, c in self._coeffs.items()}, prune=0.0)

    def __mul__(self, scalar: complex) -> 'TermSum':
        return TermSum(self._sector, {k: scalar * c for k, c in self._coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TermSum):
            return NotImplemented
        return self._sector == other._sector and self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash((self._sector, tuple(self._coeffs.items())))

    def __repr__(self) -> str:
        body = ' + '.join(
            f'({c.real:.6g}{c.imag:+.6g}j)*v^{a}*vb^{b}*L^{q}*Lb^{s}'
            for (a, b, q, s), c in self._coeffs.items()
        )
        return f'TermSum({self._sector.value}: {body or "0"})'


def _canonical(coeffs: Mapping[Key, complex], prune: float) -> Dict[Key, complex]:
    nonzero = {k: c for k, c in coeffs.items() if c != 0}
    if nonzero and prune > 0:
        threshold = prune * max(abs(c) for c in nonzero.values())
        nonzero = {k: c for k, c in nonzero.items() if abs(c) >= threshold}
    return {k: nonzero[k] for k in sorted(nonzero, key=_sort_key)}


def _sector_of(fs: Sequence[TermSum], sector: Optional[Sector]) -> Sector:
    sectors = {f.sector for f in fs}
    if sector is not None:
        sectors.add(Sector(sector))
    if len(sectors) > 1:
        raise SectorMismatchError(
            'Cannot combine sums of sectors ' + ', '.join(sorted(s.value for s in sectors))
        )
    if not sectors:
        raise DomainError('combine() needs at least one sum or an explicit sector')
    return sectors.pop()


def combine(fs: Iterable[Tuple[complex, TermSum]], sector: Optional[Sector] = None,
            prune: float = PRUNE_RELATIVE) -> TermSum:
    """
    Linear combination ``sum(c * f)`` of sums of one sector.

    Raises:
        SectorMismatchError: If the sums belong to different sectors
    """
    fs = list(fs)
    target = _sector_of([f for _, f in fs], sector)
    merged: Dict[Key, complex] = {}
    for scalar, f in fs:
        for key, c in f.items():
            merged[key] = merged.get(key, 0j) + scalar * c
    return TermSum(target, merged, prune)


def conjugate(f: TermSum) -> TermSum:
    """Pointwise complex conjugate: swaps ``(a, q)`` with ``(b, s)`` and conjugates coefficients."""
    return TermSum(f.sector, {(b, a, s, q): c.conjugate() for (a, b, q, s), c in f.items()})


def real_part(f: TermSum) -> TermSum:
    """Sum whose values are the real parts of the values of ``f``."""
    return combine([(0.5, f), (0.5, conjugate(f))])


def imag_part(f: TermSum) -> TermSum:
    """Sum whose values are the imaginary parts of the values of ``f``."""
    return combine([(-0.5j, f), (0.5j, conjugate(f))])


def _split(key: Key, wrt: Variable) -> Tuple[int, int]:
    a, b, q, s = key
    return (a, q) if wrt == Variable.VAR else (b, s)


def _join(key: Key, wrt: Variable, power: int, log_power: int) -> Key:
    a, b, q, s = key
    if wrt == Variable.VAR:
        return (power, b, log_power, s)
    return (a, power, q, log_power)


def differentiate(f: TermSum, wrt: Union[Variable, str]) -> TermSum:
    """Exact derivative with respect to the sector variable or its conjugate."""
    wrt = Variable(wrt)
    out: Dict[Key, complex] = {}
    for key, c in f.items():
        power, log_power = _split(key, wrt)
        if power:
            k = _join(key, wrt, power - 1, log_power)
            out[k] = out.get(k, 0j) + power * c
        if log_power:
            k = _join(key, wrt, power - 1, log_power - 1)
            out[k] = out.get(k, 0j) + log_power * c
    return TermSum(f.sector, out)


def antiderivative(f: TermSum, wrt: Union[Variable, str]) -> TermSum:
    """
    Primitive ``P`` with ``differentiate(P, wrt) == f``, the other variable held fixed.

    ``v^p log^n v`` integrates to ``log^(n+1) v / (n+1)`` when ``p == -1`` and
    otherwise to ``v^(p+1) * sum_t (-1)^(n-t) n!/t! / (p+1)^(n-t+1) log^t v``.

    Raises:
        MixedLogError: If the primitive needs both ``log v`` and ``log conj(v)``
    """
    wrt = Variable(wrt)
    out: Dict[Key, complex] = {}
    for key, c in f.items():
        power, log_power = _split(key, wrt)
        if power == -1:
            k = _join(key, wrt, 0, log_power + 1)
            _check_key(k)
            out[k] = out.get(k, 0j) + c / (log_power + 1)
            continue
        base = power + 1
        for t in range(log_power + 1):
            factor = ((-1) ** (log_power - t) * math.factorial(log_power)
                      / math.factorial(t) / base ** (log_power - t + 1))
            k = _join(key, wrt, base, t)
            _check_key(k)
            out[k] = out.get(k, 0j) + factor * c
    return TermSum(f.sector, out)


def multiply_by_variable(f: TermSum, wrt: Union[Variable, str], power: int = 1) -> TermSum:
    """Multiply by ``v**power`` or ``conj(v)**power``."""
    wrt = Variable(wrt)
    out = {}
    for key, c in f.items():
        p, n = _split(key, wrt)
        out[_join(key, wrt, p + power, n)] = c
    return TermSum(f.sector, out)


def mixed_derivative(f: TermSum) -> TermSum:
    """``d/dv d/dconj(v)``, a quarter of the Laplacian."""
    return differentiate(differentiate(f, Variable.CONJ), Variable.VAR)


def euler(f: TermSum) -> TermSum:
    """``r d/dr = v d/dv + conj(v) d/dconj(v)``."""
    return combine([
        (1.0, multiply_by_variable(differentiate(f, Variable.VAR), Variable.VAR)),
        (1.0, multiply_by_variable(differentiate(f, Variable.CONJ), Variable.CONJ)),
    ], sector=f.sector)


def angular(f: TermSum) -> TermSum:
    """``v d/dv - conj(v) d/dconj(v)``, which equals ``-i d/dtheta``."""
    return combine([
        (1.0, multiply_by_variable(differentiate(f, Variable.VAR), Variable.VAR)),
        (-1.0, multiply_by_variable(differentiate(f, Variable.CONJ), Variable.CONJ)),
    ], sector=f.sector)


def wrap_angle(theta: ArrayLike) -> np.ndarray:
    """Map angles to ``(-pi, pi]``."""
    return np.pi - np.mod(np.pi - np.asarray(theta, dtype=float), 2 * np.pi)


def sector_angle(theta: ArrayLike, sector: Union[Sector, str]) -> np.ndarray:
    """Argument of the local variable: ``theta`` on S-, ``theta -+ pi`` on S+."""
    theta = wrap_angle(theta)
    if Sector(sector) == Sector.MINUS:
        return theta
    return np.where(theta > 0, theta - np.pi, theta + np.pi)


def ray_angle(ray: Ray, sector: Union[Sector, str], omega: float) -> float:
    """Argument of the local variable of ``sector`` on ``ray``."""
    if Sector(sector) == Sector.MINUS:
        return ray.sign * omega / 2
    return ray.sign * (omega / 2 - math.pi)


def in_sector(theta: ArrayLike, sector: Union[Sector, str], omega: float) -> np.ndarray:
    """Closed-sector membership of wrapped angles."""
    theta = np.abs(wrap_angle(theta))
    if Sector(sector) == Sector.MINUS:
        return theta <= omega / 2 + ANGLE_SLACK
    return theta >= omega / 2 - ANGLE_SLACK


def evaluate(f: TermSum, r: ArrayLike, theta: ArrayLike, omega: float,
             check_sector: bool = True) -> Union[complex, np.ndarray]:
    """
    Evaluate ``f`` at polar points ``(r, theta)``; arrays broadcast.

    Raises:
        DomainError: If a point lies strictly inside the other sector or r < 0
        SingularEvaluationError: If a singular term is evaluated at r = 0
    """
    r_arr, theta_arr = np.broadcast_arrays(np.asarray(r, dtype=float),
                                           np.asarray(theta, dtype=float))
    if np.any(r_arr < 0):
        raise DomainError('Radius must be nonnegative')
    if check_sector and not np.all(in_sector(theta_arr, f.sector, omega)):
        raise DomainError(f'Angle outside the closed {f.sector.value} sector for omega={omega}')

    at_origin = r_arr == 0
    if np.any(at_origin):
        singular = [key for key in (k for k, _ in f.items())
                    if key[0] < 0 or key[1] < 0 or key[2] > 0 or key[3] > 0]
        if singular:
            raise SingularEvaluationError(f'Terms {singular} are singular at r=0')

    phi = sector_angle(theta_arr, f.sector)
    safe_r = np.where(at_origin, 1.0, r_arr)
    log_r = np.log(safe_r)
    log_v = log_r + 1j * phi
    log_vb = log_r - 1j * phi
    value = np.zeros(r_arr.shape, dtype=complex)
    for (a, b, q, s), c in f.items():
        term = c * safe_r ** (a + b) * np.exp(1j * (a - b) * phi)
        if q:
            term = term * log_v ** q
        if s:
            term = term * log_vb ** s
        value += term
    if np.any(at_origin):
        value = np.where(at_origin, f.coefficient(0, 0), value)
    if value.ndim == 0:
        return complex(value)
    return value


@dataclass(frozen=True)
class TraceLogPolynomial:
    """
    Restriction of a homogeneous sum to one ray: ``r^homogeneity * sum_t coeffs[t] log^t r``.
    """
    ray: Ray
    homogeneity: int
    coeffs: Tuple[complex, ...] = ()

    def __post_init__(self):
        coeffs = [complex(c) for c in self.coeffs]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, 'coeffs', tuple(coeffs))

    @classmethod
    def from_polynomial(cls, ray: Ray, homogeneity: int, poly: Polynomial) -> 'TraceLogPolynomial':
        return cls(ray, homogeneity, tuple(poly.coef))

    @property
    def polynomial(self) -> Polynomial:
        return Polynomial(np.array(self.coeffs or (0j,), dtype=complex))

    @property
    def degree(self) -> int:
        """Highest log power present, -1 for the zero trace."""
        return len(self.coeffs) - 1

    def coefficient(self, t: int) -> complex:
        return self.coeffs[t] if 0 <= t < len(self.coeffs) else 0j

    @property
    def magnitude(self) -> float:
        return max((abs(c) for c in self.coeffs), default=0.0)

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.magnitude <= tol

    def _compatible(self, other: 'TraceLogPolynomial') -> int:
        if self.ray != other.ray:
            raise DomainError('Traces live on different rays')
        if not self.coeffs:
            return other.homogeneity
        if other.coeffs and other.homogeneity != self.homogeneity:
            raise DomainError(
                f'Cannot add traces of homogeneity {self.homogeneity} and {other.homogeneity}'
            )
        return self.homogeneity

    def __add__(self, other: 'TraceLogPolynomial') -> 'TraceLogPolynomial':
        h = self._compatible(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return TraceLogPolynomial(self.ray, h, tuple(self.coefficient(t) + other.coefficient(t)
                                                      for t in range(n)))

    def __sub__(self, other: 'TraceLogPolynomial') -> 'TraceLogPolynomial':
        return self + other.scale(-1.0)

    def scale(self, factor: complex) -> 'TraceLogPolynomial':
        return TraceLogPolynomial(self.ray, self.homogeneity, tuple(factor * c for c in self.coeffs))

    def evaluate(self, r: ArrayLike) -> Union[complex, np.ndarray]:
        r = np.asarray(r, dtype=float)
        value = r ** self.homogeneity * self.polynomial(np.log(r))
        return complex(value) if value.ndim == 0 else value


def restrict_to_ray(f: TermSum, ray: Ray, omega: float,
                    homogeneity: Optional[int] = None) -> TraceLogPolynomial:
    """
    Trace of a homogeneous sum on ``theta = ray.sign * omega / 2``.

    ``log v`` becomes ``log r + i phi`` and ``log conj(v)`` becomes
    ``log r - i phi`` with ``phi`` the argument of the local variable on the ray.

    Raises:
        DomainError: If ``f`` is not homogeneous
    """
    degrees = f.degrees
    if len(degrees) > 1:
        raise DomainError(f'Trace of a non-homogeneous sum (degrees {degrees})')
    if degrees:
        if homogeneity is not None and homogeneity != degrees[0]:
            raise DomainError(f'Expected homogeneity {homogeneity}, found {degrees[0]}')
        homogeneity = degrees[0]
    elif homogeneity is None:
        homogeneity = 0

    phi = ray_angle(ray, f.sector, omega)
    forward = Polynomial([1j * phi, 1.0])
    backward = Polynomial([-1j * phi, 1.0])
    total = Polynomial([0j])
    for (a, b, q, s), c in f.items():
        total = total + c * np.exp(1j * (a - b) * phi) * forward ** q * backward ** s
    return TraceLogPolynomial.from_polynomial(ray, homogeneity, total)


def shift_log(coeffs: Sequence[complex], shift: complex) -> List[complex]:
    """
    Rewrite ``sum c_t x^t`` as ``sum d_t (x + shift)^t`` and return ``d``.
    """
    poly = Polynomial(np.array(list(coeffs) or [0j], dtype=complex))
    shifted = poly(Polynomial([-shift, 1.0]))
    return [complex(c) for c in shifted.coef]
