"""
Truncated primal and dual singular functions and their angular tables.

``S^{k,p}_m = sum_{j<=m} (i zeta^2)^j s^{k,p}_j`` where ``s^{k,p}_j`` is the
real (``p = 0``) or imaginary (``p = 1``) part of the ``j``-th primal shadow
of ``z^k``; dual functions ``K^{k,p}_m`` use the real part and minus the
imaginary part of the dual shadows.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike

from .exceptions import DomainError, ShadowEngineError
from .shadow_engine import ChainKind, ShadowChain, build_chain
from .term_algebra import (
    Sector, TermSum, combine, euler, evaluate, imag_part, mixed_derivative, real_part
)
from .utils.validators import validate_nonnegative_int, validate_omega, validate_part

logger = logging.getLogger(__name__)

MU0 = 4e-7 * math.pi
CONTINUITY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class DomainConfig:
    """Opening angle and skin parameter of the corner; ``zeta^2 = kappa mu0 sigma / 4``."""
    omega: float
    zeta: float
    kappa: Optional[float] = None
    mu0: Optional[float] = None
    sigma: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'omega', validate_omega(self.omega))
        zeta = float(self.zeta)
        if not math.isfinite(zeta) or zeta < 0:
            raise DomainError(f'zeta must be nonnegative, got {self.zeta}')
        object.__setattr__(self, 'zeta', zeta)
        physical = (self.kappa, self.mu0, self.sigma)
        if any(v is not None for v in physical):
            if any(v is None or v <= 0 for v in physical):
                raise DomainError('kappa, mu0 and sigma must all be given and positive')
            expected = math.sqrt(self.kappa * self.mu0 * self.sigma / 4)
            if not math.isclose(expected, zeta, rel_tol=1e-12):
                raise DomainError(f'zeta={zeta} disagrees with kappa mu0 sigma / 4 (zeta={expected})')

    @classmethod
    def from_physical(cls, omega: float, kappa: float, sigma: float, mu0: float = MU0) -> 'DomainConfig':
        if min(kappa, sigma, mu0) <= 0:
            raise DomainError('kappa, mu0 and sigma must be positive')
        return cls(omega, math.sqrt(kappa * mu0 * sigma / 4), kappa, mu0, sigma)

    @property
    def izeta2(self) -> complex:
        return 1j * self.zeta ** 2


def _part(f: TermSum, kind: ChainKind, p: int) -> TermSum:
    if p == 0:
        return real_part(f)
    return imag_part(f) if kind == ChainKind.PRIMAL else -imag_part(f)


class SingularSeries:
    """
    ``S^{k,p}_m`` or ``K^{k,p}_m`` for one chain, ``zeta`` and ``m``.

    Instances are immutable; evaluation broadcasts over ``r`` and ``theta``
    and uses the minus piece on the rays ``theta = +-omega/2``.
    """

    def __init__(self, chain: ShadowChain, p: int, m: int, zeta: float):
        m = validate_nonnegative_int('m', m)
        if m > chain.J:
            raise DomainError(f'Chain of depth {chain.J} cannot be truncated at m={m}')
        self.chain = chain
        self.p = validate_part(chain.k, p)
        self.m = m
        self.zeta = float(zeta)
        self._parts: Tuple[Tuple[TermSum, TermSum], ...] = tuple(
            (_part(pair.minus, chain.kind, p), _part(pair.plus, chain.kind, p))
            for pair in chain.pairs[:m + 1]
        )
        self._scales = tuple((1j * self.zeta ** 2) ** j for j in range(m + 1))

    @classmethod
    def build(cls, k: int, p: int, kind: ChainKind, m: int, domain: DomainConfig) -> 'SingularSeries':
        validate_part(k, p)
        chain = build_chain(k, kind, m, domain.omega)
        return cls(chain, p, m, domain.zeta)

    @property
    def k(self) -> int:
        return self.chain.k

    @property
    def kind(self) -> ChainKind:
        return self.chain.kind

    @property
    def omega(self) -> float:
        return self.chain.omega

    def shadow_part(self, j: int) -> Tuple[TermSum, TermSum]:
        """Real-valued sums ``(s_j^-, s_j^+)`` of shadow ``j``."""
        return self._parts[j]

    def as_term_sums(self) -> Iterator[Tuple[complex, TermSum, TermSum]]:
        """``((i zeta^2)^j, s_j^-, s_j^+)`` for ``j = 0..m``."""
        for scale, (minus, plus) in zip(self._scales, self._parts):
            yield scale, minus, plus

    def _sum(self, r: ArrayLike, theta: ArrayLike, op=None) -> np.ndarray:
        r, theta = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(theta, dtype=float))
        if np.any(r <= 0):
            raise DomainError('Singular functions are evaluated at r > 0 only')
        wrapped = np.angle(np.exp(1j * theta))
        inside = np.abs(wrapped) <= self.omega / 2
        value = np.zeros(r.shape, dtype=complex)
        for scale, minus, plus in self.as_term_sums():
            if op is not None:
                minus, plus = op(minus), op(plus)
            value += scale * np.where(
                inside,
                evaluate(minus, r, wrapped, self.omega, check_sector=False),
                evaluate(plus, r, wrapped, self.omega, check_sector=False),
            )
        return value

    def __call__(self, r: ArrayLike, theta: ArrayLike):
        value = self._sum(r, theta)
        return complex(value) if value.ndim == 0 else value

    def radial_derivative(self, r: ArrayLike, theta: ArrayLike):
        """``d/dr`` through ``r d/dr = z d/dz + zbar d/dzbar``."""
        value = self._sum(r, theta, op=euler) / np.asarray(r, dtype=float)
        return complex(value) if value.ndim == 0 else value

    def operator_residual(self) -> Tuple[TermSum, TermSum]:
        """
        ``(-Laplace + 4 i zeta^2 1_{S-})`` applied to the truncated series, per sector.

        Equals ``4 i zeta^2 (i zeta^2)^m s_m`` on S- and zero on S+.
        """
        izeta2 = 1j * self.zeta ** 2
        minus = combine([(-4 * scale, mixed_derivative(f)) for scale, f, _ in self.as_term_sums()]
                        + [(4 * izeta2 * scale, f) for scale, f, _ in self.as_term_sums()],
                        sector=Sector.MINUS, prune=0.0)
        plus = combine([(-4 * scale, mixed_derivative(g)) for scale, _, g in self.as_term_sums()],
                       sector=Sector.PLUS, prune=0.0)
        return minus, plus

    def residual_values(self, r: ArrayLike, theta: ArrayLike):
        """Values of :meth:`operator_residual`, i.e. the source that ``S_m`` solves exactly."""
        minus, plus = self.operator_residual()
        r, theta = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(theta, dtype=float))
        if np.any(r <= 0):
            raise DomainError('Singular functions are evaluated at r > 0 only')
        wrapped = np.angle(np.exp(1j * theta))
        value = np.where(np.abs(wrapped) <= self.omega / 2,
                         evaluate(minus, r, wrapped, self.omega, check_sector=False),
                         evaluate(plus, r, wrapped, self.omega, check_sector=False))
        return complex(value) if value.ndim == 0 else value

    def angular_table(self) -> 'AngularTable':
        return angular_decompose(self.chain, self.p)

    def __repr__(self) -> str:
        name = 'S' if self.kind == ChainKind.PRIMAL else 'K'
        return f'{name}^{{{self.k},{self.p}}}_{self.m}(omega={self.omega:.6g}, zeta={self.zeta:.6g})'


# ---------------------------------------------------------------------------
# Angular tables
# ---------------------------------------------------------------------------

Piece = Tuple[complex, int, int]  # coefficient * phi^power * exp(i freq phi)


def _pieces(f: TermSum, n: int) -> List[Piece]:
    """Angular pieces of the ``log^n r`` coefficient of ``f``."""
    out: Dict[Tuple[int, int], complex] = {}
    for (a, b, q, s), c in f.items():
        power, sign = (q, 1) if q else (s, -1)
        if power < n:
            continue
        coeff = c * math.comb(power, n) * (sign * 1j) ** (power - n)
        key = (a - b, power - n)
        out[key] = out.get(key, 0j) + coeff
    return [(c, freq, d) for (freq, d), c in sorted(out.items()) if c != 0]


class AngularFunction:
    """
    Piecewise angular function ``sum c phi^d exp(i nu phi)``.

    ``phi`` is ``theta`` on the minus piece and ``theta_+`` on the plus piece.
    Values are real for the parts stored in :class:`AngularTable`.
    """

    def __init__(self, omega: float, minus: List[Piece], plus: List[Piece]):
        self.omega = omega
        self.minus = tuple(minus)
        self.plus = tuple(plus)

    @staticmethod
    def _eval(pieces, phi, derivative=False):
        phi = np.asarray(phi, dtype=float)
        value = np.zeros(phi.shape, dtype=complex)
        for c, freq, d in pieces:
            wave = np.exp(1j * freq * phi)
            if derivative:
                lower = d * phi ** (d - 1) if d else 0.0
                value += c * (lower + 1j * freq * phi ** d) * wave
            else:
                value += c * phi ** d * wave
        return value

    def _piecewise(self, theta, derivative):
        theta = np.angle(np.exp(1j * np.asarray(theta, dtype=float)))
        theta_plus = np.where(theta > 0, theta - math.pi, theta + math.pi)
        inside = np.abs(theta) <= self.omega / 2
        value = np.where(inside, self._eval(self.minus, theta, derivative),
                         self._eval(self.plus, theta_plus, derivative)).real
        return value if value.ndim else float(value)

    def __call__(self, theta: ArrayLike):
        return self._piecewise(theta, False)

    def derivative(self, theta: ArrayLike):
        return self._piecewise(theta, True)

    @property
    def is_zero(self) -> bool:
        return not (self.minus or self.plus)

    def seam_defects(self) -> Dict[str, float]:
        """Jumps of value and derivative across both rays."""
        half = self.omega / 2
        out = {'value': 0.0, 'derivative': 0.0}
        for sign in (1, -1):
            phi_minus = sign * half
            phi_plus = sign * (half - math.pi)
            for name, derivative in (('value', False), ('derivative', True)):
                jump = self._eval(self.minus, phi_minus, derivative) - self._eval(self.plus, phi_plus, derivative)
                out[name] = max(out[name], abs(complex(jump)))
        return out

    def real_form(self, plus: bool = False) -> Dict[Tuple[str, int, int], float]:
        """Coefficients of ``phi^d cos(nu phi)`` and ``phi^d sin(nu phi)`` keyed by (trig, nu, d)."""
        out: Dict[Tuple[str, int, int], float] = {}
        for c, freq, d in (self.plus if plus else self.minus):
            nu = abs(freq)
            sign = 1 if freq >= 0 else -1
            out[('cos', nu, d)] = out.get(('cos', nu, d), 0.0) + c.real
            if nu:
                out[('sin', nu, d)] = out.get(('sin', nu, d), 0.0) - sign * c.imag
        return {key: v for key, v in out.items() if abs(v) > 1e-15}

    def render(self, plus: bool = False) -> str:
        angle = 'theta_+' if plus else 'theta'
        terms = []
        for (trig, nu, d), c in sorted(self.real_form(plus).items(), key=lambda x: (x[0][1], x[0][2], x[0][0])):
            factor = '' if d == 0 else (f' {angle}' if d == 1 else f' {angle}^{d}')
            wave = '' if nu == 0 else (f' {trig}({angle})' if nu == 1 else f' {trig}({nu} {angle})')
            terms.append(f'{c:+.12g}{factor}{wave}')
        return ' '.join(terms) if terms else '0'


class AngularTable:
    """``Phi^{k,p}_{j,n}`` (primal) or ``Psi^{k,p}_{j,n}`` (dual) for one chain."""

    def __init__(self, chain: ShadowChain, p: int, entries: Dict[Tuple[int, int], AngularFunction]):
        self.chain = chain
        self.k = chain.k
        self.p = p
        self.kind = chain.kind
        self.entries = dict(entries)
        self._zero = AngularFunction(chain.omega, [], [])

    @property
    def depth(self) -> int:
        return self.chain.J

    def get(self, j: int, n: int) -> AngularFunction:
        if j > self.depth:
            raise DomainError(f'Angular table of depth {self.depth} has no shadow j={j}')
        return self.entries.get((j, n), self._zero)

    def __call__(self, j: int, n: int, theta: ArrayLike):
        return self.get(j, n)(theta)

    def reassemble(self, r: ArrayLike, theta: ArrayLike, zeta: float, m: int):
        """``sum_j (i zeta^2)^j r^(+-k+2j) sum_n log^n r Phi_{j,n}(theta)``."""
        r = np.asarray(r, dtype=float)
        base = self.k if self.kind == ChainKind.PRIMAL else -self.k
        value = 0j
        for (j, n), f in self.entries.items():
            if j <= m:
                value = value + (1j * zeta ** 2) ** j * r ** (base + 2 * j) * np.log(r) ** n * f(theta)
        return value


def angular_decompose(chain: ShadowChain, p: int) -> AngularTable:
    """
    Split every shadow of ``chain`` into ``r^lambda sum_n log^n r Phi_{j,n}(theta)``.

    Raises:
        ShadowEngineError: If an angular function is not C1 across the rays
    """
    validate_part(chain.k, p)
    entries = {}
    for j, pair in enumerate(chain.pairs):
        minus, plus = _part(pair.minus, chain.kind, p), _part(pair.plus, chain.kind, p)
        scale = max(minus.magnitude, plus.magnitude, 1e-300)
        for n in range(pair.log_degree + 1):
            f = AngularFunction(chain.omega, _pieces(minus, n), _pieces(plus, n))
            if f.is_zero:
                continue
            defects = f.seam_defects()
            if max(defects.values()) > CONTINUITY_TOLERANCE * scale:
                raise ShadowEngineError(
                    f'Angular function j={j}, n={n} of k={chain.k} is not C1 across the rays: {defects}'
                )
            entries[(j, n)] = f
    logger.debug('angular table %s k=%d p=%d: %d entries', chain.kind.value, chain.k, p, len(entries))
    return AngularTable(chain, p, entries)


def render_chain(chain: ShadowChain, p: int) -> str:
    """Text rendering of the real shadows of a chain, one line per ``(j, log power, sector)``."""
    table = angular_decompose(chain, p)
    base = chain.k if chain.kind == ChainKind.PRIMAL else -chain.k
    lines = [f'# {chain.kind.value} k={chain.k} p={p} omega={chain.omega:.12g}']
    for j in range(chain.J + 1):
        for n in range(chain.pairs[j].log_degree + 1):
            f = table.get(j, n)
            if f.is_zero:
                continue
            radial = f'r^{base + 2 * j}' + ('' if n == 0 else (' log r' if n == 1 else f' log^{n} r'))
            lines.append(f'j={j} {radial} | minus: {f.render()}')
            lines.append(f'j={j} {radial} | plus:  {f.render(plus=True)}')
    return '\n'.join(lines)


def grid_rows(series: SingularSeries, radii: ArrayLike, thetas: ArrayLike) -> List[Tuple[float, float, float, float]]:
    """Rows ``(r, theta, re, im)`` of the series on a tensor grid."""
    rr, tt = np.meshgrid(np.asarray(radii, dtype=float), np.asarray(thetas, dtype=float), indexing='ij')
    values = np.atleast_1d(series(rr.ravel(), tt.ravel()))
    return [(float(r), float(t), float(v.real), float(v.imag))
            for r, t, v in zip(rr.ravel(), tt.ravel(), values)]
