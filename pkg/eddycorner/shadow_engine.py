"""
Shadow terms of the primal and dual corner singularities.

A shadow of order ``j`` is a pair ``(V, W)`` of term sums, ``V`` on the
conducting sector and ``W`` on its complement, solving

    d/dz d/dzbar V = V_{j-1}   on S-,
    d/dz+ d/dz+bar W = 0       on S+,

with continuous value and normal derivative across the rays
``theta = +-omega/2``. For a homogeneity ``lam != 0`` the transmission
conditions are written as the vanishing of ``dV/dz + dW/dz+`` and
``dV/dzbar + dW/dz+bar`` on both rays; for ``lam == 0`` the angular
derivative ``(z d/dz - zbar d/dzbar)`` and the value itself are matched.

The recursion works level by level in the power of the logarithm. Each
call of :func:`elementary_step` removes the top log level of a problem by a
particular interior solution and a small Ansatz of harmonic pairs, and
hands the lower levels back as a residual problem.
"""
import enum
import logging
import math
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, List, NamedTuple, Sequence, Tuple

import numpy as np

from .config import Config
from .exceptions import DomainError, ShadowEngineError
from .term_algebra import (
    RAYS, Ray, Sector, TermSum, TraceLogPolynomial, Variable, angular, combine, conjugate,
    differentiate, mixed_derivative, restrict_to_ray, shift_log
)
from .utils.validators import validate_omega

logger = logging.getLogger(__name__)

JUMP_TOLERANCE = Config.JUMP_TOLERANCE
PROBLEM_PRUNE = 1e-14
CONVENTION_TOLERANCE = 1e-9

MINUS = Sector.MINUS
PLUS = Sector.PLUS


class ChainKind(str, enum.Enum):
    """Leading singularity of a chain: ``z^k`` (primal) or ``z^-k`` / ``log z`` (dual)."""
    PRIMAL = 'primal'
    DUAL = 'dual'


@dataclass(frozen=True)
class SectorPair:
    """One shadow: ``minus`` on S-, ``plus`` on S+, both homogeneous of degree ``homogeneity``."""
    minus: TermSum
    plus: TermSum
    homogeneity: int

    def __post_init__(self):
        if self.minus.sector != MINUS or self.plus.sector != PLUS:
            raise DomainError('SectorPair needs a minus sum and a plus sum')
        for f in (self.minus, self.plus):
            if f.degrees and f.degrees != (self.homogeneity,):
                raise DomainError(
                    f'Pair of homogeneity {self.homogeneity} holds terms of degrees {f.degrees}'
                )

    @classmethod
    def zero(cls, homogeneity: int) -> 'SectorPair':
        return cls(TermSum.zero(MINUS), TermSum.zero(PLUS), homogeneity)

    @property
    def magnitude(self) -> float:
        return max(self.minus.magnitude, self.plus.magnitude)

    @property
    def log_degree(self) -> int:
        return max(self.minus.log_degree, self.plus.log_degree)

    def __add__(self, other: 'SectorPair') -> 'SectorPair':
        return SectorPair(self.minus + other.minus, self.plus + other.plus, self.homogeneity)

    def __sub__(self, other: 'SectorPair') -> 'SectorPair':
        return SectorPair(self.minus - other.minus, self.plus - other.plus, self.homogeneity)

    def scale(self, factor: complex) -> 'SectorPair':
        return SectorPair(factor * self.minus, factor * self.plus, self.homogeneity)

    def conjugate(self) -> 'SectorPair':
        return SectorPair(conjugate(self.minus), conjugate(self.plus), self.homogeneity)

    def is_close(self, other: 'SectorPair', tol: float) -> bool:
        return self.minus.is_close(other.minus, tol) and self.plus.is_close(other.plus, tol)


@dataclass(frozen=True)
class ShadowChain:
    """Shadows ``pairs[0..J]`` of one leading singularity."""
    k: int
    kind: ChainKind
    omega: float
    pairs: Tuple[SectorPair, ...]

    @property
    def J(self) -> int:
        return len(self.pairs) - 1

    @property
    def magnitude(self) -> float:
        return max(pair.magnitude for pair in self.pairs)

    def __getitem__(self, j: int) -> SectorPair:
        return self.pairs[j]

    def __len__(self) -> int:
        return len(self.pairs)


class InteriorMonomial(NamedTuple):
    """Source ``alpha * z^(lam-2-ell) * zbar^ell * log^n z`` on S-."""
    alpha: complex
    ell: int
    n: int


class TraceCoefficient(NamedTuple):
    """Trace defect ``value * basis_n``, with the conjugate value on the ray -omega/2."""
    value: complex
    n: int


def _jump_keys(lam: int) -> Tuple[str, str]:
    return ('var', 'conj') if lam != 0 else ('angular', 'dirichlet')


@dataclass(frozen=True)
class ElementaryProblem:
    """
    Interior sources and transmission defects of one homogeneity.

    For ``lam != 0`` the defects ``trace_g`` and ``trace_h`` are the required
    values of ``dV/dz + dW/dz+`` and ``dV/dzbar + dW/dz+bar`` on the ray
    ``+omega/2``, expanded on ``z^(lam-1) log^n z`` and
    ``zbar^(lam-1) log^n zbar``. For ``lam == 0`` they are the angular and
    Dirichlet jumps expanded on ``log^n z``. On the ray ``-omega/2`` the
    conjugate coefficients apply.
    """
    lam: int
    interior: Tuple[InteriorMonomial, ...] = ()
    trace_g: Tuple[TraceCoefficient, ...] = ()
    trace_h: Tuple[TraceCoefficient, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'interior', tuple(InteriorMonomial(*e) for e in self.interior))
        object.__setattr__(self, 'trace_g', tuple(TraceCoefficient(*e) for e in self.trace_g))
        object.__setattr__(self, 'trace_h', tuple(TraceCoefficient(*e) for e in self.trace_h))
        for entry in self.interior:
            if entry.ell < 0 or entry.n < 0:
                raise DomainError(f'Invalid interior monomial {entry}')
        for entry in self.trace_g + self.trace_h:
            if entry.n < 0:
                raise DomainError(f'Invalid trace coefficient {entry}')

    def trace_level(self, which: str, n: int) -> int:
        """Log level at which a defect of power ``n`` is cleared."""
        if self.lam == 0 and which == 'h':
            return max(n - 1, 0)
        return n

    @property
    def top_level(self) -> int:
        levels = [e.n for e in self.interior]
        levels += [self.trace_level('g', e.n) for e in self.trace_g]
        levels += [self.trace_level('h', e.n) for e in self.trace_h]
        return max(levels, default=-1)

    @property
    def is_empty(self) -> bool:
        return not (self.interior or self.trace_g or self.trace_h)

    @property
    def magnitude(self) -> float:
        values = [e.alpha for e in self.interior] + [e.value for e in self.trace_g + self.trace_h]
        return max((abs(v) for v in values), default=0.0)

    def split(self, level: int) -> Tuple['ElementaryProblem', 'ElementaryProblem']:
        """Return the part at ``level`` and the part below it."""
        def at(which, entries, wanted):
            return tuple(e for e in entries if (self.trace_level(which, e.n) == level) == wanted)

        top = ElementaryProblem(
            self.lam,
            tuple(e for e in self.interior if e.n == level),
            at('g', self.trace_g, True),
            at('h', self.trace_h, True),
        )
        rest = ElementaryProblem(
            self.lam,
            tuple(e for e in self.interior if e.n != level),
            at('g', self.trace_g, False),
            at('h', self.trace_h, False),
        )
        return top, rest

    @classmethod
    def merge(cls, lam: int, problems: Iterable['ElementaryProblem'],
              prune: float = PROBLEM_PRUNE) -> 'ElementaryProblem':
        """Sum problems of one homogeneity, merging equal monomials and dropping negligible ones."""
        interior: Dict[Tuple[int, int], complex] = {}
        g: Dict[int, complex] = {}
        h: Dict[int, complex] = {}
        for problem in problems:
            if problem.lam != lam:
                raise ShadowEngineError(f'Cannot merge problems of homogeneity {problem.lam} and {lam}')
            for e in problem.interior:
                interior[(e.ell, e.n)] = interior.get((e.ell, e.n), 0j) + e.alpha
            for e in problem.trace_g:
                g[e.n] = g.get(e.n, 0j) + e.value
            for e in problem.trace_h:
                h[e.n] = h.get(e.n, 0j) + e.value
        scale = max([abs(v) for v in list(interior.values()) + list(g.values()) + list(h.values())],
                    default=0.0)
        threshold = prune * scale

        def keep(value):
            return value != 0 and abs(value) > threshold

        return cls(
            lam,
            tuple(InteriorMonomial(v, ell, n) for (ell, n), v in sorted(interior.items()) if keep(v)),
            tuple(TraceCoefficient(v, n) for n, v in sorted(g.items()) if keep(v)),
            tuple(TraceCoefficient(v, n) for n, v in sorted(h.items()) if keep(v)),
        )


@dataclass(frozen=True)
class ElementaryResult:
    """Particular solution of the top level and what is left below it."""
    particular: SectorPair
    residual: ElementaryProblem
    coefficients: Dict[Tuple[int, str], complex] = field(default_factory=dict)
    branch: str = 'regular'


# ---------------------------------------------------------------------------
# Transmission jumps
# ---------------------------------------------------------------------------

def transmission_jumps(pair: SectorPair, omega: float) -> Dict[str, Dict[Ray, TraceLogPolynomial]]:
    """
    Jump traces of a pair on both rays.

    Returns ``{'var': .., 'conj': ..}`` for ``lam != 0`` and
    ``{'angular': .., 'dirichlet': ..}`` for ``lam == 0``, each a mapping
    from ray to trace polynomial.
    """
    lam = pair.homogeneity
    jumps: Dict[str, Dict[Ray, TraceLogPolynomial]] = {}
    if lam != 0:
        for key, wrt in (('var', Variable.VAR), ('conj', Variable.CONJ)):
            dv = differentiate(pair.minus, wrt)
            dw = differentiate(pair.plus, wrt)
            jumps[key] = {
                ray: restrict_to_ray(dv, ray, omega, lam - 1) + restrict_to_ray(dw, ray, omega, lam - 1)
                for ray in RAYS
            }
    else:
        av, aw = angular(pair.minus), angular(pair.plus)
        jumps['angular'] = {
            ray: restrict_to_ray(av, ray, omega, 0) - restrict_to_ray(aw, ray, omega, 0)
            for ray in RAYS
        }
        jumps['dirichlet'] = {
            ray: restrict_to_ray(pair.minus, ray, omega, 0) - restrict_to_ray(pair.plus, ray, omega, 0)
            for ray in RAYS
        }
    return jumps


def jump_magnitude(pair: SectorPair, omega: float) -> float:
    """Largest coefficient of all jump traces of ``pair``."""
    return max(trace.magnitude
               for traces in transmission_jumps(pair, omega).values()
               for trace in traces.values())


def _basis_shape(key: str, lam: int, ray: Ray, omega: float) -> Tuple[complex, complex]:
    """Phase and log shift of the trace basis of ``key`` on ``ray``."""
    psi = ray.sign * omega / 2
    m = lam - 1 if lam != 0 else 0
    sign = -1 if key == 'conj' else 1
    return np.exp(1j * sign * m * psi), 1j * sign * psi


def _traces_from_problem(problem: ElementaryProblem,
                         omega: float) -> Dict[str, Dict[Ray, TraceLogPolynomial]]:
    lam = problem.lam
    homogeneity = lam - 1 if lam != 0 else 0
    traces = {}
    for key, entries in zip(_jump_keys(lam), (problem.trace_g, problem.trace_h)):
        traces[key] = {}
        for ray in RAYS:
            phase, shift = _basis_shape(key, lam, ray, omega)
            size = max((e.n for e in entries), default=-1) + 1
            coeffs = [0j] * size
            for e in entries:
                coeffs[e.n] += e.value if ray == Ray.PLUS_OMEGA_HALF else complex(e.value).conjugate()
            # sum_n c_n (x + shift)^n  written in powers of x
            in_x = shift_log(coeffs, -shift) if coeffs else []
            traces[key][ray] = TraceLogPolynomial(ray, homogeneity, tuple(phase * c for c in in_x))
    return traces


def _basis_values(trace: TraceLogPolynomial, key: str, lam: int, omega: float) -> List[complex]:
    """Coefficients of ``trace`` on the basis ``v^m log^n v`` of its ray."""
    if not trace.coeffs:
        return []
    phase, shift = _basis_shape(key, lam, trace.ray, omega)
    return [c / phase for c in shift_log(trace.coeffs, shift)]


def _problem_from_traces(lam: int, traces: Dict[str, Dict[Ray, TraceLogPolynomial]],
                         omega: float, below_level: int, scale: float) -> ElementaryProblem:
    """
    Expand trace defects on the problem basis, keeping levels below ``below_level``.

    Raises:
        ShadowEngineError: If the ray -omega/2 does not carry the conjugate coefficients
    """
    probe = ElementaryProblem(lam)
    lists = []
    for which, key in zip(('g', 'h'), _jump_keys(lam)):
        plus_values = _basis_values(traces[key][Ray.PLUS_OMEGA_HALF], key, lam, omega)
        minus_values = _basis_values(traces[key][Ray.MINUS_OMEGA_HALF], key, lam, omega)
        kept = []
        for n in range(max(len(plus_values), len(minus_values))):
            if probe.trace_level(which, n) >= below_level:
                continue
            value = plus_values[n] if n < len(plus_values) else 0j
            mirror = minus_values[n] if n < len(minus_values) else 0j
            if abs(mirror - value.conjugate()) > CONVENTION_TOLERANCE * scale:
                raise ShadowEngineError(
                    f'Trace defect {key} at log power {n} breaks the conjugate convention'
                )
            kept.append(TraceCoefficient(value, n))
        lists.append(tuple(kept))
    return ElementaryProblem(lam, (), lists[0], lists[1])


# ---------------------------------------------------------------------------
# Ansatz of harmonic pairs used to clear one log level
# ---------------------------------------------------------------------------

def _pair(minus: Dict, plus: Dict, lam: int) -> SectorPair:
    return SectorPair(TermSum(MINUS, minus), TermSum(PLUS, plus), lam)


def _ansatz_basis(lam: int, level: int) -> List[Tuple[str, SectorPair]]:
    """Harmonic pairs whose jumps start at log power ``level``."""
    if lam != 0:
        sgn = (-1) ** lam
        top = level + 1
        return [
            ('A', _pair({(lam, 0, top, 0): 1.0}, {(lam, 0, top, 0): sgn}, lam)),
            ('A_conj', _pair({(0, lam, 0, top): 1.0}, {(0, lam, 0, top): sgn}, lam)),
            ('B', _pair({(lam, 0, level, 0): 1.0}, {}, lam)),
            ('B_conj', _pair({}, {(0, lam, 0, level): sgn}, lam)),
        ]
    if level >= 1:
        top = level + 2
        return [
            ('A', _pair({(0, 0, top, 0): 1.0}, {(0, 0, top, 0): 1.0}, 0)),
            ('A_conj', _pair({(0, 0, 0, top): 1.0}, {(0, 0, 0, top): 1.0}, 0)),
            ('B', _pair({(0, 0, level + 1, 0): 1.0}, {}, 0)),
            ('B_conj', _pair({}, {(0, 0, 0, level + 1): 1.0}, 0)),
        ]
    return [
        ('A', _pair({(0, 0, 2, 0): 1.0}, {(0, 0, 2, 0): 1.0}, 0)),
        ('A_conj', _pair({(0, 0, 0, 2): 1.0}, {(0, 0, 0, 2): 1.0}, 0)),
        ('B', _pair({(0, 0, 1, 0): 1.0}, {}, 0)),
        ('B_tilde', _pair({}, {(0, 0, 1, 0): 1.0}, 0)),
        ('B_conj', _pair({}, {(0, 0, 0, 1): 1.0}, 0)),
        ('C', _pair({}, {(0, 0, 0, 0): 1.0}, 0)),
    ]


def _equations(lam: int, level: int) -> List[Tuple[str, Ray, int]]:
    """(jump, ray, log power) rows matched when clearing ``level``."""
    if lam != 0:
        rows = [('var', level), ('conj', level)]
    elif level >= 1:
        rows = [('angular', level), ('dirichlet', level + 1)]
    else:
        rows = [('angular', 0), ('dirichlet', 1), ('dirichlet', 0)]
    return [(key, ray, power) for key, power in rows for ray in RAYS]


@lru_cache(maxsize=512)
def _ansatz_system(lam: int, level: int, omega: float):
    basis = _ansatz_basis(lam, level)
    jumps = [transmission_jumps(pair, omega) for _, pair in basis]
    rows = _equations(lam, level)
    matrix = np.array([[jump[key][ray].coefficient(power) for jump in jumps]
                       for key, ray, power in rows], dtype=complex)
    return basis, jumps, rows, matrix


def _defect_level(lam: int, defect: Dict[str, Dict[Ray, TraceLogPolynomial]]) -> int:
    level = -1
    for key, traces in defect.items():
        for trace in traces.values():
            degree = trace.degree
            if degree < 0:
                continue
            if lam == 0 and key == 'dirichlet':
                degree = max(degree - 1, 0)
            level = max(level, degree)
    return level


def _add_traces(left, right, factor=1.0):
    return {key: {ray: left[key][ray] + right[key][ray].scale(factor) for ray in RAYS} for key in left}


def _interior_sum(lam: int, entries: Iterable[InteriorMonomial]) -> TermSum:
    return TermSum(MINUS, {(lam - 2 - e.ell, e.ell, e.n, 0): e.alpha for e in entries})


def _interior_entries(lam: int, f: TermSum) -> Tuple[InteriorMonomial, ...]:
    entries = []
    for (a, b, q, s), c in f.items():
        if s or b < 0 or a + b != lam - 2:
            raise ShadowEngineError(f'Interior term {(a, b, q, s)} is not of the form z^a zbar^ell log^n z')
        entries.append(InteriorMonomial(c, b, q))
    return tuple(entries)


def particular_interior(lam: int, ell: int, n: int) -> TermSum:
    """
    Leading part of a primitive of ``z^(lam-2-ell) zbar^ell log^n z``.

    ``z^(lam-ell-1) zbar^(ell+1) log^n z / ((lam-ell-1)(ell+1))`` in general and
    ``zbar^(ell+1) log^(n+1) z / ((n+1)(ell+1))`` when ``ell == lam - 1``.
    """
    if ell == lam - 1:
        return TermSum.monomial(MINUS, 1.0 / ((n + 1) * (ell + 1)), 0, ell + 1, n + 1)
    return TermSum.monomial(MINUS, 1.0 / ((lam - ell - 1) * (ell + 1)), lam - ell - 1, ell + 1, n)


def elementary_step(problem: ElementaryProblem, omega: float) -> ElementaryResult:
    """
    Clear the top log level of ``problem``.

    The interior monomials of the top level ``n`` get their leading
    primitive; the jumps this creates are subtracted from the required
    defects, and the defects of levels ``>= n`` (one more in the resonant
    case ``ell == lam - 1``) are then cancelled by the harmonic Ansatz of
    each level. Entries below ``n`` pass through to the residual untouched.
    For ``n == 0`` the residual is empty.
    """
    lam = problem.lam
    n = problem.top_level
    if n < 0:
        return ElementaryResult(SectorPair.zero(lam), problem, {}, 'empty')

    top, rest = problem.split(n)
    minus = combine([(e.alpha, particular_interior(lam, e.ell, e.n)) for e in top.interior],
                    sector=MINUS)
    resonant = any(e.ell == lam - 1 and e.alpha != 0 for e in top.interior)
    if lam == 0:
        branch = 'logarithmic' if n >= 1 else 'logarithmic_exact'
    else:
        branch = 'resonant' if resonant else 'regular'

    # the top level cancels exactly; only rounding is left there
    interior_residual = _interior_sum(lam, top.interior) - mixed_derivative(minus)

    particular = SectorPair(minus, TermSum.zero(PLUS), lam)
    defect = _add_traces(_traces_from_problem(top, omega), transmission_jumps(particular, omega), -1.0)

    coefficients: Dict[Tuple[int, str], complex] = {}
    start = max(_defect_level(lam, defect), n)
    for level in range(start, n - 1, -1):
        basis, jumps, rows, matrix = _ansatz_system(lam, level, omega)
        rhs = np.array([defect[key][ray].coefficient(power) for key, ray, power in rows], dtype=complex)
        if not np.any(rhs):
            continue
        try:
            solution = np.linalg.solve(matrix, rhs)
        except np.linalg.LinAlgError as e:
            raise ShadowEngineError(f'Singular Ansatz system at homogeneity {lam}, level {level}') from e
        for (name, pair), jump, value in zip(basis, jumps, solution):
            coefficients[(level, name)] = complex(value)
            particular = particular + pair.scale(value)
            defect = _add_traces(defect, jump, -value)

    residual = ElementaryProblem.merge(lam, [
        rest,
        ElementaryProblem(lam, tuple(e for e in _interior_entries(lam, interior_residual) if e.n < n)),
        _problem_from_traces(lam, defect, omega, below_level=n,
                             scale=max(problem.magnitude, particular.magnitude, 1e-300)),
    ])
    if not residual.is_empty and residual.top_level >= n:
        raise ShadowEngineError(f'Level {n} was not cleared at homogeneity {lam}')
    logger.debug('elementary step lam=%d n=%d branch=%s residual=%d entries',
                 lam, n, branch, len(residual.interior) + len(residual.trace_g) + len(residual.trace_h))
    return ElementaryResult(particular, residual, coefficients, branch)


# ---------------------------------------------------------------------------
# Shadows
# ---------------------------------------------------------------------------

def _solve_z_type(lam: int, entries: Sequence[InteriorMonomial], omega: float) -> SectorPair:
    problem = ElementaryProblem.merge(lam, [ElementaryProblem(lam, tuple(entries))])
    result = SectorPair.zero(lam)
    limit = 2 * (max(problem.top_level, 0) + 2)
    previous = None
    passes = 0
    while not problem.is_empty:
        passes += 1
        level = problem.top_level
        if passes > limit or (previous is not None and level >= previous):
            raise ShadowEngineError(
                f'Shadow recursion did not terminate at homogeneity {lam} (pass {passes}, level {level})'
            )
        previous = level
        top, rest = problem.split(level)
        residuals = [rest]
        for entry in top.interior:
            step = elementary_step(ElementaryProblem(lam, (entry,)), omega)
            result = result + step.particular
            residuals.append(step.residual)
        if top.trace_g or top.trace_h:
            step = elementary_step(ElementaryProblem(lam, (), top.trace_g, top.trace_h), omega)
            result = result + step.particular
            residuals.append(step.residual)
        problem = ElementaryProblem.merge(lam, residuals)
    return result


def kernel_pairs(lam: int) -> Tuple[SectorPair, SectorPair]:
    """The two homogeneous pairs of degree ``lam`` with zero source and zero jumps."""
    if lam != 0:
        sgn = (-1) ** lam
        return (_pair({(lam, 0, 0, 0): 1.0}, {(lam, 0, 0, 0): sgn}, lam),
                _pair({(0, lam, 0, 0): 1.0}, {(0, lam, 0, 0): sgn}, lam))
    return (_pair({(0, 0, 0, 0): 1.0}, {(0, 0, 0, 0): 1.0}, 0),
            _pair({(0, 0, 1, 0): 1.0, (0, 0, 0, 1): 1.0}, {(0, 0, 1, 0): 1.0, (0, 0, 0, 1): 1.0}, 0))


def pin_representative(pair: SectorPair) -> SectorPair:
    """
    Fix the kernel component of a shadow.

    For ``lam != 0`` the pure ``z+^lam`` term of the plus side and the pure
    ``zbar^lam`` term of the minus side are removed; for ``lam == 0`` the
    ``log zbar`` term and then the constant of the minus side.
    """
    lam = pair.homogeneity
    first, second = kernel_pairs(lam)
    if lam != 0:
        pair = pair - first.scale(pair.plus.coefficient(lam, 0) / (-1) ** lam)
        return pair - second.scale(pair.minus.coefficient(0, lam))
    pair = pair - second.scale(pair.minus.coefficient(0, 0, 0, 1))
    return pair - first.scale(pair.minus.coefficient(0, 0))


def check_shadow(pair: SectorPair, source: TermSum, omega: float,
                 tol: float = JUMP_TOLERANCE) -> Dict[str, float]:
    """
    Residuals of the shadow equations, scaled by the pair magnitude.

    Returns the relative PDE residual on each side and the largest relative
    jump coefficient.
    """
    scale = max(pair.magnitude, source.magnitude, 1e-300)
    return {
        'pde_minus': (mixed_derivative(pair.minus) - source).magnitude / scale,
        'pde_plus': mixed_derivative(pair.plus).magnitude / scale,
        'jump': jump_magnitude(pair, omega) / scale,
    }


def next_shadow(prev: SectorPair, kind: ChainKind, omega: float,
                tol: float = JUMP_TOLERANCE) -> SectorPair:
    """
    Shadow generated by ``prev``: homogeneity ``prev.homogeneity + 2``.

    Interior monomials of ``prev.minus`` that carry ``log zbar`` (or a
    negative power of ``z``) are handled through their conjugates, the
    others directly; the sum is pinned by :func:`pin_representative` and
    checked against the shadow equations.

    Raises:
        ShadowEngineError: If the recursion fails or a residual exceeds ``tol``
    """
    validate_omega(omega)
    kind = ChainKind(kind)
    lam = prev.homogeneity + 2
    direct, conjugated = [], {}
    for (a, b, q, s), c in prev.minus.items():
        if s == 0 and b >= 0:
            direct.append(InteriorMonomial(c, b, q))
        elif q == 0 and a >= 0:
            conjugated[(b, a, s, 0)] = c.conjugate()
        else:
            raise ShadowEngineError(f'Source term {(a, b, q, s)} has no primitive without mixed logs')

    pair = _solve_z_type(lam, direct, omega)
    if conjugated:
        mirrored = _interior_entries(lam, TermSum(MINUS, conjugated))
        pair = pair + _solve_z_type(lam, mirrored, omega).conjugate()
    pair = pin_representative(pair)

    residuals = check_shadow(pair, prev.minus, omega)
    worst = max(residuals.values())
    if worst > tol:
        raise ShadowEngineError(
            f'{kind.value} shadow of homogeneity {lam} fails its equations: '
            + ', '.join(f'{name}={value:.3e}' for name, value in residuals.items())
        )
    return pair


def seed_pair(k: int, kind: ChainKind) -> SectorPair:
    """Leading term of a chain: ``z^k``, ``z^-k / (2k pi)`` or ``-log z / (2 pi)``."""
    kind = ChainKind(kind)
    if k < 0:
        raise DomainError(f'Chains start at k >= 0, got k={k}')
    if kind == ChainKind.PRIMAL:
        return _pair({(k, 0, 0, 0): 1.0}, {(k, 0, 0, 0): (-1) ** k}, k)
    if k == 0:
        c = -1.0 / (2 * math.pi)
        return _pair({(0, 0, 1, 0): c}, {(0, 0, 1, 0): c}, 0)
    c = 1.0 / (2 * k * math.pi)
    return _pair({(-k, 0, 0, 0): c}, {(-k, 0, 0, 0): c * (-1) ** k}, -k)


@lru_cache(maxsize=256)
def _cached_chain(k: int, kind: ChainKind, J: int, omega: float) -> ShadowChain:
    if J == 0:
        return ShadowChain(k, kind, omega, (seed_pair(k, kind),))
    shorter = _cached_chain(k, kind, J - 1, omega)
    pair = next_shadow(shorter.pairs[-1], kind, omega)
    return ShadowChain(k, kind, omega, shorter.pairs + (pair,))


def build_chain(k: int, kind: ChainKind, J: int, omega: float) -> ShadowChain:
    """
    Shadows ``0..J`` of the primal (``z^k``) or dual (``z^-k``, ``log z``) singularity.

    Chains are memoized per ``(k, kind, J, omega)``.

    Raises:
        DomainError: For negative ``k`` or ``J`` or an invalid ``omega``
    """
    kind = ChainKind(kind)
    validate_omega(omega)
    if k < 0:
        raise DomainError(f'{kind.value} chains need k >= 0, got k={k}')
    if J < 0:
        raise DomainError(f'J must be nonnegative, got {J}')
    start = time.time()
    chain = _cached_chain(int(k), kind, int(J), float(omega))
    logger.debug('%s chain k=%d J=%d omega=%.6f ready in %.3f s',
                 kind.value, k, J, omega, time.time() - start)
    return chain


# ---------------------------------------------------------------------------
# Closed forms of the first shadows
# ---------------------------------------------------------------------------

def first_shadow_of_power(k: int, omega: float) -> SectorPair:
    """
    Closed-form first shadow generated by ``z^k``, any integer ``k``.

    The pair has homogeneity ``k + 2``; ``k = -1`` and ``k = -2`` have
    their own resonant forms.
    """
    s, c = math.sin(omega), math.cos(omega)
    pi = math.pi
    if k == -1:
        return _pair(
            {(1, 0, 1, 0): s / pi, (0, 1, 0, 1): (omega - pi) / pi, (1, 0, 0, 0): -c, (0, 1, 1, 0): 1.0},
            {(1, 0, 1, 0): -s / pi, (0, 1, 0, 1): -omega / pi, (0, 1, 0, 0): 1.0},
            1,
        )
    if k == -2:
        return _pair(
            {(0, 0, 2, 0): s / (2 * pi), (0, 0, 0, 2): s / (2 * pi),
             (0, 0, 1, 0): -(s + (2 * pi - omega) * c) / pi, (-1, 1, 0, 0): -1.0},
            {(0, 0, 2, 0): s / (2 * pi), (0, 0, 0, 2): s / (2 * pi),
             (0, 0, 1, 0): -(s + (pi - omega) * c) / pi, (0, 0, 0, 1): -c,
             (0, 0, 0, 0): -c + (pi - omega) * s},
            0,
        )
    lam = k + 2
    log_coeff = s / (pi * lam)
    conj_log_coeff = math.sin((k + 1) * omega) / (pi * (k + 1) * lam)
    sgn = (-1) ** k
    return _pair(
        {(lam, 0, 1, 0): log_coeff, (0, lam, 0, 1): conj_log_coeff,
         (lam, 0, 0, 0): -c / lam, (k + 1, 1, 0, 0): 1.0 / (k + 1)},
        {(lam, 0, 1, 0): sgn * log_coeff, (0, lam, 0, 1): sgn * conj_log_coeff,
         (0, lam, 0, 0): sgn * math.cos((k + 1) * omega) / ((k + 1) * lam)},
        lam,
    )


def first_shadow_of_log(omega: float) -> SectorPair:
    """Closed-form first shadow generated by ``-log z / (2 pi)``; homogeneity 2."""
    s, c = math.sin(omega), math.cos(omega)
    pi = math.pi
    minus = {
        (2, 0, 2, 0): s / (4 * pi),
        (0, 2, 0, 2): s / (4 * pi),
        (2, 0, 1, 0): -(s + 2 * pi * c) / (4 * pi),
        (0, 2, 0, 1): -(3 * s + 2 * (pi - omega) * c) / (4 * pi),
        (2, 0, 0, 0): -(pi * s - c) / 4,
        (1, 1, 1, 0): 1.0,
        (1, 1, 0, 0): -1.0,
    }
    plus = {
        (2, 0, 2, 0): s / (4 * pi),
        (0, 2, 0, 2): s / (4 * pi),
        (2, 0, 1, 0): -s / (4 * pi),
        (0, 2, 0, 1): -(3 * s - 2 * omega * c) / (4 * pi),
        (0, 2, 0, 0): -(3 * c + (2 * omega - pi) * s) / 4,
    }
    factor = -1.0 / (2 * pi)
    return _pair({key: factor * v for key, v in minus.items()},
                 {key: factor * v for key, v in plus.items()}, 2)


# ---------------------------------------------------------------------------
# Structure checks
# ---------------------------------------------------------------------------

def degree_bound(k: int, kind: ChainKind, j: int) -> int:
    """Largest log power allowed in shadow ``j`` of a chain."""
    if ChainKind(kind) == ChainKind.PRIMAL:
        return j
    if j % 2 == 1 or 2 * j < k:
        return j
    return j + 1


def template_coefficients(chain: ShadowChain, j: int) -> Dict[str, complex]:
    """
    Top-log coefficients of primal shadow ``j``.

    ``a`` multiplies ``z^(k+2j) log^j z`` and ``a_conj`` its conjugate on the
    minus side; the plus side is reported under ``a_plus`` and ``a_conj_plus``.
    """
    pair = chain.pairs[j]
    lam = pair.homogeneity
    return {
        'a': pair.minus.coefficient(lam, 0, j, 0),
        'a_conj': pair.minus.coefficient(0, lam, 0, j),
        'a_plus': pair.plus.coefficient(lam, 0, j, 0),
        'a_conj_plus': pair.plus.coefficient(0, lam, 0, j),
    }


def max_imaginary(pair: SectorPair) -> float:
    """Largest imaginary part among the coefficients of a pair, relative to its magnitude."""
    values = [c for f in (pair.minus, pair.plus) for _, c in f.items()]
    if not values:
        return 0.0
    return max(abs(c.imag) for c in values) / max(pair.magnitude, 1e-300)


def verify_chain(chain: ShadowChain, tol: float = JUMP_TOLERANCE) -> List[str]:
    """
    Check every invariant of a chain and return the list of failures.

    Covered: shadow equations, degree bounds, homogeneities and real
    coefficients (evenness of real parts).
    """
    failures = []
    sign = 1 if chain.kind == ChainKind.PRIMAL else -1
    for j, pair in enumerate(chain.pairs):
        expected = sign * chain.k + 2 * j
        if pair.homogeneity != expected:
            failures.append(f'j={j}: homogeneity {pair.homogeneity} != {expected}')
        bound = degree_bound(chain.k, chain.kind, j)
        if pair.log_degree > bound:
            failures.append(f'j={j}: log degree {pair.log_degree} exceeds {bound}')
        imaginary = max_imaginary(pair)
        if imaginary > tol:
            failures.append(f'j={j}: coefficients not real ({imaginary:.3e})')
        if j == 0:
            continue
        residuals = check_shadow(pair, chain.pairs[j - 1].minus, chain.omega)
        for name, value in residuals.items():
            if value > tol:
                failures.append(f'j={j}: {name} residual {value:.3e}')
    return failures
