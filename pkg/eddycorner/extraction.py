"""
Extraction of the singular coefficients ``Lambda^{k,p}`` from circle data.

Two families of estimators are provided: the method of moments, which
projects the field on ``cos(k theta - p pi/2)``, and the quasi-dual
function method, which pairs the field with truncated dual singular
functions through the anti-symmetric form

    J_R(K, A) = int_{r=R} (K dA/dr - A dK/dr) R dtheta.

Both can be swept over a range of radii to measure how the error decays.
"""
import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from typing_extensions import TypeAlias

from .config import Config
from .exceptions import DomainError, ExtractionError
from .quadrature import integrate_circle
from .shadow_engine import ChainKind, build_chain
from .singular_functions import AngularTable, DomainConfig, SingularSeries, angular_decompose
from .utils.validators import validate_part, validate_positive, validate_radii

logger = logging.getLogger(__name__)

Key: TypeAlias = Tuple[int, int]
AngularFunctionLike: TypeAlias = Callable[[np.ndarray], np.ndarray]

EXACT_TOLERANCE = 1e-12
MIN_SWEEP_POINTS = 4

# Disk test problem: R_domain = 0.05 m, zeta = 1/(5 sqrt 2) per mm, omega = pi/4
REFERENCE_VALUES: Dict[str, complex] = {
    'A_center': 0.114449904 - 0.0464907336j,
    'J_K10': -12.970664 - 5.40915055j,
    'J_K20': 1406.54919 + 4599.19999j,
    'J_K30': 93037.6253 - 154720.669j,
}


class Provenance(str, enum.Enum):
    MANUFACTURED = 'manufactured'
    SOLVED = 'solved'
    SERIES = 'series'


@dataclass(frozen=True)
class FieldOnCircle:
    """Value and radial derivative of a field on the circle ``r = R``, as functions of theta."""
    R: float
    value: Callable[[np.ndarray], np.ndarray]
    radial_derivative: Callable[[np.ndarray], np.ndarray]
    provenance: Provenance = Provenance.SERIES

    @classmethod
    def from_series(cls, terms: Sequence[Tuple[complex, SingularSeries]], R: float,
                    provenance: Provenance = Provenance.MANUFACTURED) -> 'FieldOnCircle':
        """Field ``sum Lambda * S`` built from singular series."""
        R = validate_positive('R', R)
        terms = tuple(terms)

        def value(theta):
            return sum(c * s(R, theta) for c, s in terms)

        def radial_derivative(theta):
            return sum(c * s.radial_derivative(R, theta) for c, s in terms)

        return cls(R, value, radial_derivative, Provenance(provenance))

    @classmethod
    def constant(cls, c: complex, R: float) -> 'FieldOnCircle':
        R = validate_positive('R', R)
        return cls(R,
                   lambda theta: np.full(np.shape(theta), c, dtype=complex),
                   lambda theta: np.zeros(np.shape(theta), dtype=complex),
                   Provenance.MANUFACTURED)


FieldFamily: TypeAlias = Callable[[float], FieldOnCircle]


def manufactured_family(coefficients: Dict[Key, complex], domain: DomainConfig, m: int = 3) -> FieldFamily:
    """``R -> sum Lambda^{k,p} S^{k,p}_m`` restricted to the circle ``r = R``."""
    series = [(c, SingularSeries.build(k, p, ChainKind.PRIMAL, m, domain))
              for (k, p), c in sorted(coefficients.items())]

    def family(R: float) -> FieldOnCircle:
        return FieldOnCircle.from_series(series, R)

    return family


# ---------------------------------------------------------------------------
# Circle functionals
# ---------------------------------------------------------------------------

def _as_angular(K: Union[SingularSeries, AngularFunctionLike], R: float) -> AngularFunctionLike:
    if isinstance(K, SingularSeries):
        return lambda theta: K(R, theta)
    return K


def form_M(K: Union[SingularSeries, AngularFunctionLike], A: FieldOnCircle, omega: float) -> complex:
    """``M_R(K, A) = int_0^{2 pi} K A dtheta`` on the circle of ``A``."""
    kernel = _as_angular(K, A.R)
    return integrate_circle(lambda theta: kernel(theta) * A.value(theta), omega)


def form_J(K: SingularSeries, A: FieldOnCircle) -> complex:
    """``J_R(K, A) = int (K dA/dr - A dK/dr) R dtheta`` on the circle of ``A``."""
    R = A.R

    def integrand(theta):
        return (K(R, theta) * A.radial_derivative(theta) - A.value(theta) * K.radial_derivative(R, theta)) * R

    return integrate_circle(integrand, K.omega)


def R0(R: Union[float, np.ndarray], zeta: float) -> Union[float, np.ndarray]:
    """Small parameter ``zeta R (1 + sqrt|log R|)`` of all remainder estimates."""
    R = np.asarray(R, dtype=float)
    value = zeta * R * (1 + np.sqrt(np.abs(np.log(R))))
    return float(value) if value.ndim == 0 else value


# ---------------------------------------------------------------------------
# Coupling coefficients
# ---------------------------------------------------------------------------

def _integrate_angular(f: AngularFunctionLike, omega: float) -> complex:
    return integrate_circle(f, omega)


def coupling_coefficient(k: int, p: int, ell: int, domain: DomainConfig, p_prime: Optional[int] = None) -> complex:
    """
    ``Jcal^{k,p;k-2ell,p'}``: limit of ``J_R(K^{k,p}, S^{k-2ell,p'})`` as ``R -> 0``.

    Computed from the angular functions of the dual chain of ``k`` and the
    primal chain of ``k - 2 ell``, both to depth ``ell``. Vanishes when the
    parities differ.
    """
    validate_part(k, p)
    p_prime = p if p_prime is None else p_prime
    if ell < 1 or 2 * ell > k:
        raise DomainError(f'Coupling needs 1 <= ell <= k/2, got k={k}, ell={ell}')
    k_low = k - 2 * ell
    if p_prime != p or (k_low == 0 and p_prime == 1):
        return 0j
    dual = angular_decompose(build_chain(k, ChainKind.DUAL, ell, domain.omega), p)
    primal = angular_decompose(build_chain(k_low, ChainKind.PRIMAL, ell, domain.omega), p)
    total = 0j
    for j in range(ell + 1):
        psi0, psi1 = dual.get(j, 0), dual.get(j, 1)
        phi0, phi1 = primal.get(ell - j, 0), primal.get(ell - j, 1)

        def integrand(theta, j=j, psi0=psi0, psi1=psi1, phi0=phi0, phi1=phi1):
            return (psi0(theta) * (2 * (k - 2 * j) * phi0(theta) + phi1(theta))
                    - psi1(theta) * phi0(theta))

        total += _integrate_angular(integrand, domain.omega)
    return domain.izeta2 ** ell * total


@dataclass(frozen=True)
class CouplingMatrix:
    """Couplings ``Jcal^{k,p;k-2ell,p}`` for ``k <= k_max``."""
    entries: Dict[Tuple[int, int, int], complex]

    @classmethod
    def build(cls, k_max: int, domain: DomainConfig, parts: Iterable[int] = (0, 1)) -> 'CouplingMatrix':
        entries = {}
        for p in parts:
            for k in range(2, k_max + 1):
                for ell in range(1, k // 2 + 1):
                    entries[(k, p, ell)] = coupling_coefficient(k, p, ell, domain)
        return cls(entries)

    def get(self, k: int, p: int, ell: int) -> complex:
        return self.entries.get((k, p, ell), 0j)


# ---------------------------------------------------------------------------
# Remainder models and reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelTerm:
    """``R^r_power R0^r0_power |log R|^log_power``."""
    r_power: int
    r0_power: int
    log_power: int = 0

    def __call__(self, R, zeta):
        R = np.asarray(R, dtype=float)
        return R ** self.r_power * R0(R, zeta) ** self.r0_power * np.abs(np.log(R)) ** self.log_power

    @property
    def exponent(self) -> int:
        return self.r_power + self.r0_power

    def log_factor(self, R):
        R = np.asarray(R, dtype=float)
        return (1 + np.sqrt(np.abs(np.log(R)))) ** self.r0_power * np.abs(np.log(R)) ** self.log_power


@dataclass(frozen=True)
class RemainderModel:
    """Sum of model terms; the slope is that of the dominant term as ``R -> 0``."""
    terms: Tuple[ModelTerm, ...]

    def __call__(self, R, zeta):
        return sum(term(R, zeta) for term in self.terms)

    @property
    def dominant(self) -> ModelTerm:
        return min(self.terms, key=lambda t: (t.exponent, -t.r0_power - t.log_power))

    @property
    def exponent(self) -> int:
        return self.dominant.exponent

    def log_factor(self, R):
        return self.dominant.log_factor(R)

    def describe(self) -> str:
        parts = []
        for t in self.terms:
            text = ' '.join(x for x in (
                f'R^{t.r_power}' if t.r_power else '',
                f'R0^{t.r0_power}' if t.r0_power else '',
                'log R' if t.log_power else '') if x)
            parts.append(text or '1')
        return ' + '.join(parts)


def quasidual_model(k: int, p: int, m: int) -> RemainderModel:
    """``R^-k R0^(2m+2) log R``; ``R^(1-k)`` when ``p = 1``, and no log when ``k`` is odd."""
    return RemainderModel((ModelTerm(-k + p, 2 * m + 2, 0 if k % 2 else 1),))


class MomentVariant(str, enum.Enum):
    N1_ONE_TERM = 'N1_one_term'
    N1_TWO_TERMS = 'N1_two_terms'
    N3 = 'N3'


def moments_model(key: Key, variant: MomentVariant) -> RemainderModel:
    if variant == MomentVariant.N1_ONE_TERM:
        return RemainderModel((ModelTerm(-1 if key == (1, 0) else 0, 2),))
    if key == (1, 0):
        if variant == MomentVariant.N3:
            # the R0^2 self-moment of S^{1,0} is not divided out
            return RemainderModel((ModelTerm(0, 2), ModelTerm(1, 2), ModelTerm(-1, 4)))
        return RemainderModel((ModelTerm(-1, 2),))
    return RemainderModel((ModelTerm(1, 2), ModelTerm(0, 4)))


@dataclass
class ExtractionEstimate:
    """Estimates at one radius: ``raw`` before and ``corrected`` after coupling corrections."""
    R: float
    R0: float
    raw: Dict[Key, complex]
    corrected: Dict[Key, complex]
    corrections_applied: Dict[Key, bool] = field(default_factory=dict)


@dataclass
class SweepRow:
    R: float
    k: int
    p: int
    estimate: complex
    error: complex
    model_value: float
    corrected: bool


@dataclass
class SlopeFit:
    expected: float
    slope: Optional[float]
    exact: bool
    points: int


@dataclass
class ExtractionReport:
    method: str
    domain: DomainConfig
    estimates: List[ExtractionEstimate]
    models: Dict[Key, RemainderModel]
    m: Optional[int] = None
    variant: Optional[str] = None
    reference: Dict[Key, complex] = field(default_factory=dict)
    sweep: List[SweepRow] = field(default_factory=list)
    slopes: Dict[Key, SlopeFit] = field(default_factory=dict)

    @property
    def keys(self) -> List[Key]:
        return sorted(self.models)

    def estimate(self, key: Key, R: Optional[float] = None) -> complex:
        """Corrected estimate at ``R`` (the smallest radius by default)."""
        chosen = min(self.estimates, key=lambda e: e.R if R is None else abs(e.R - R))
        return chosen.corrected[key]

    def csv_rows(self) -> List[Dict[str, float]]:
        return [{
            'R': row.R, 'k': row.k, 'p': row.p,
            'estimate_re': row.estimate.real, 'estimate_im': row.estimate.imag,
            'err_re': row.error.real, 'err_im': row.error.imag, 'err_abs': abs(row.error),
            'model_value': row.model_value, 'corrected_flag': int(row.corrected),
        } for row in self.sweep]


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------

def _parts_for(k: int, parts: Iterable[int]) -> List[int]:
    return [p for p in parts if not (k == 0 and p == 1)]


def quasidual_extract(family: FieldFamily, domain: DomainConfig, k_max: int, m: int,
                      radii: Sequence[float], parts: Iterable[int] = (0, 1),
                      couplings: Optional[CouplingMatrix] = None) -> ExtractionReport:
    """
    Quasi-dual estimates of ``Lambda^{k,p}``, ``k <= k_max``, at each radius.

    ``J_R(K^{k,p}_m, A)`` is computed for every ``k`` and the lower
    triangular coupling system is solved by increasing ``k``:
    ``Lambda^{k,p} = J_R(K^{k,p}_m, A) - sum_ell Jcal^{k,p;k-2ell,p} Lambda^{k-2ell,p}``.

    Raises:
        ExtractionError: If ``2m + 2 <= k_max``
    """
    if 2 * m + 2 <= k_max:
        raise ExtractionError(f'Quasi-dual extraction up to k={k_max} needs 2m+2 > k_max, got m={m}')
    radii = validate_radii(radii)
    parts = tuple(parts)
    keys = [(k, p) for k in range(k_max + 1) for p in _parts_for(k, parts)]
    duals = {key: SingularSeries.build(key[0], key[1], ChainKind.DUAL, m, domain) for key in keys}
    if couplings is None:
        couplings = CouplingMatrix.build(k_max, domain, parts)

    estimates = []
    for R in radii:
        A = family(float(R))
        raw = {key: form_J(duals[key], A) for key in keys}
        corrected: Dict[Key, complex] = {}
        flags: Dict[Key, bool] = {}
        for k, p in keys:
            value = raw[(k, p)]
            applied = False
            for ell in range(1, k // 2 + 1):
                lower = (k - 2 * ell, p)
                if lower in corrected:
                    value -= couplings.get(k, p, ell) * corrected[lower]
                    applied = True
            corrected[(k, p)] = value
            flags[(k, p)] = applied
        estimates.append(ExtractionEstimate(float(R), R0(float(R), domain.zeta), raw, corrected, flags))
        logger.debug('quasi-dual R=%.3e: %s', R, {key: complex(v) for key, v in corrected.items()})

    models = {(k, p): quasidual_model(k, p, m) for k, p in keys}
    return ExtractionReport('quasidual', domain, estimates, models, m=m)


def _cos_kernel(k: int, p: int, R: float) -> AngularFunctionLike:
    if k == 0:
        return lambda theta: np.full(np.shape(theta), 1.0 / (2 * math.pi))
    return lambda theta: R ** -k * np.cos(k * np.asarray(theta) - p * math.pi / 2) / math.pi


def moment(k: int, p: int, A: FieldOnCircle, omega: float) -> complex:
    """``M^{k,p}_R(A)``: ``(1/2pi) int A`` for ``k = 0``, ``2k M_R(k^{k,p}_0, A)`` otherwise."""
    validate_part(k, p)
    return form_M(_cos_kernel(k, p, A.R), A, omega)


def moment_coefficients(domain: DomainConfig) -> Dict[str, Tuple[complex, complex]]:
    """
    Angular moments ``m_{1,q}``, ``q = 0, 1``, of the first shadows.

    ``m00`` is the mean of ``Phi^{0,0}_{1,q}``, ``m10`` its ``cos`` moment and
    ``m11`` the ``sin`` moment of ``Phi^{1,1}_{1,q}``, with the ``1/pi``
    normalization of ``M^{1,p}``.
    """
    omega = domain.omega
    table00 = angular_decompose(build_chain(0, ChainKind.PRIMAL, 1, omega), 0)
    table11 = angular_decompose(build_chain(1, ChainKind.PRIMAL, 1, omega), 1)

    def moments(table: AngularTable, weight, norm):
        return tuple(norm * _integrate_angular(lambda t, q=q: weight(t) * table.get(1, q)(t), omega)
                     for q in (0, 1))

    return {
        'm00': moments(table00, lambda t: np.ones(np.shape(t)), 1 / (2 * math.pi)),
        'm10': moments(table00, np.cos, 1 / math.pi),
        'm11': moments(table11, np.sin, 1 / math.pi),
    }


def moments_extract(family: FieldFamily, domain: DomainConfig, radii: Sequence[float],
                    variant: Union[MomentVariant, str] = MomentVariant.N1_TWO_TERMS) -> ExtractionReport:
    """
    Method-of-moments estimates of ``Lambda^{0,0}``, ``Lambda^{1,0}`` and ``Lambda^{1,1}``.

    ``N1_one_term`` uses the moments as they are; ``N1_two_terms`` divides
    by the two-term expansion of ``M(S)``; ``N3`` also removes the coupling
    of ``Lambda^{0,0}`` into the ``cos`` moment, which carries an ``R^-1``.

    The ``cos`` moment of ``S^{1,0}`` itself is left undivided, so the ``N3``
    estimate of ``Lambda^{1,0}`` keeps an ``R0^2`` error next to the
    ``R^-1 R0^4`` left by the second-order coupling of ``Lambda^{0,0}``.

    Raises:
        ExtractionError: If a radius exceeds 1
    """
    variant = MomentVariant(variant)
    radii = validate_radii(radii)
    if np.any(radii > 1):
        raise ExtractionError('The method of moments assumes R <= 1')
    coeffs = moment_coefficients(domain) if variant != MomentVariant.N1_ONE_TERM else None
    keys = [(0, 0), (1, 0), (1, 1)]
    estimates = []
    for R in radii:
        R = float(R)
        A = family(R)
        raw = {key: moment(key[0], key[1], A, domain.omega) for key in keys}
        corrected = dict(raw)
        flags = {key: False for key in keys}
        if coeffs is not None:
            logs = (1.0, math.log(R))
            zr2 = (domain.zeta * R) ** 2

            def series(name):
                return sum(c * l for c, l in zip(coeffs[name], logs))

            denom00 = 1 + 1j * zr2 * series('m00')
            corrected[(0, 0)] = raw[(0, 0)] / denom00
            corrected[(1, 1)] = raw[(1, 1)] / (1 + 1j * zr2 * series('m11'))
            flags[(0, 0)] = flags[(1, 1)] = True
            if variant == MomentVariant.N3:
                corrected[(1, 0)] = raw[(1, 0)] - raw[(0, 0)] * (1j / R * zr2 * series('m10')) / denom00
                flags[(1, 0)] = True
        estimates.append(ExtractionEstimate(R, R0(R, domain.zeta), raw, corrected, flags))

    models = {key: moments_model(key, variant) for key in keys}
    return ExtractionReport('moments', domain, estimates, models, variant=variant.value)


# ---------------------------------------------------------------------------
# Convergence studies
# ---------------------------------------------------------------------------

def geometric_radii(r_max: float, r_min: float, points: int) -> np.ndarray:
    """``points`` radii from ``r_max`` down to ``r_min`` in geometric progression."""
    if points < 2 or not 0 < r_min < r_max:
        raise ExtractionError(f'Invalid R grid: {points} points from {r_max} to {r_min}')
    return np.geomspace(r_max, r_min, points)


def fit_slope(radii: Sequence[float], errors: Sequence[float], model: RemainderModel,
              scale: float = 1.0) -> SlopeFit:
    """
    Least-squares slope of ``log(error / log factors)`` against ``log R``.

    Errors at rounding level everywhere are reported as exact; otherwise
    only the points above rounding level are fitted.

    Raises:
        ExtractionError: If fewer than four usable points remain
    """
    radii = np.asarray(radii, dtype=float)
    errors = np.abs(np.asarray(errors))
    floor = EXACT_TOLERANCE * max(scale, 1.0)
    if np.all(errors <= floor):
        return SlopeFit(float(model.exponent), None, True, len(radii))
    usable = errors > floor
    if np.count_nonzero(usable) < MIN_SWEEP_POINTS:
        raise ExtractionError(
            f'Need at least {MIN_SWEEP_POINTS} usable sweep points, got {np.count_nonzero(usable)}'
        )
    x = np.log(radii[usable])
    y = np.log(errors[usable] / model.log_factor(radii[usable]))
    slope = float(np.polyfit(x, y, 1)[0])
    return SlopeFit(float(model.exponent), slope, False, int(np.count_nonzero(usable)))


def attach_errors(report: ExtractionReport, reference: Dict[Key, complex]) -> ExtractionReport:
    """Fill the sweep table and the fitted slopes of ``report`` against ``reference``."""
    report.reference = dict(reference)
    report.sweep = []
    report.slopes = {}
    for key in report.keys:
        if key not in reference:
            continue
        model = report.models[key]
        errors = []
        for est in report.estimates:
            value = est.corrected[key]
            error = value - reference[key]
            errors.append(error)
            report.sweep.append(SweepRow(est.R, key[0], key[1], value, error,
                                         float(model(est.R, report.domain.zeta)),
                                         est.corrections_applied.get(key, False)))
        radii = [est.R for est in report.estimates]
        report.slopes[key] = fit_slope(radii, errors, model, scale=abs(reference[key]))
    return report


def convergence_study(method: str, family: FieldFamily, domain: DomainConfig, radii: Sequence[float],
                      reference: Optional[Dict[Key, complex]] = None, m: int = 1, k_max: int = 1,
                      variant: Union[MomentVariant, str] = MomentVariant.N1_TWO_TERMS,
                      parts: Iterable[int] = (0,), r_small: Optional[float] = None) -> ExtractionReport:
    """
    Sweep an estimator over ``radii`` and fit the decay of its error.

    The reference is either given (manufactured fields) or taken as the
    estimate at ``r_small`` (solved fields).

    Raises:
        ExtractionError: If neither a reference nor ``r_small`` is supplied
    """
    parts = tuple(parts)

    def run(grid):
        if method == 'quasidual':
            return quasidual_extract(family, domain, k_max, m, grid, parts)
        if method == 'moments':
            return moments_extract(family, domain, grid, variant)
        raise ExtractionError(f'Unknown extraction method {method!r}')

    if reference is None:
        if r_small is None:
            raise ExtractionError('A reference or r_small is required')
        base = run([r_small])
        reference = dict(base.estimates[0].corrected)
    report = run(radii)
    attach_errors(report, reference)
    for key, fit in report.slopes.items():
        logger.info('%s %s: slope %s (expected %.1f)', method, key,
                    'exact' if fit.exact else f'{fit.slope:.3f}', fit.expected)
    return report


# ---------------------------------------------------------------------------
# Reconstruction
# ---------------------------------------------------------------------------

def reconstruct(coefficients: Dict[Key, complex], domain: DomainConfig, order: int,
                r, theta) -> np.ndarray:
    """
    Composite-order partial sum ``sum Lambda^{k,p} (i zeta^2)^j s^{k,p}_j`` with ``k + 2j <= order``.
    """
    if order < 0:
        raise DomainError(f'order must be nonnegative, got {order}')
    r, theta = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(theta, dtype=float))
    total = np.zeros(r.shape, dtype=complex)
    for (k, p), c in sorted(coefficients.items()):
        if k > order:
            continue
        depth = (order - k) // 2
        total += c * SingularSeries.build(k, p, ChainKind.PRIMAL, depth, domain)(r, theta)
    return total


def reference_functionals(family: FieldFamily, domain: DomainConfig, R: float,
                          k_values: Iterable[int] = (1, 2, 3), m: int = 1) -> Dict[str, complex]:
    """``J_R(K^{k,0}_m, A)`` at one radius, keyed like :data:`REFERENCE_VALUES`."""
    A = family(R)
    return {f'J_K{k}0': form_J(SingularSeries.build(k, 0, ChainKind.DUAL, m, domain), A) for k in k_values}


def default_radii(r_domain: float, points: int = Config.SWEEP_POINTS) -> np.ndarray:
    return geometric_radii(Config.SWEEP_R_MAX_FRACTION * r_domain,
                           Config.SWEEP_R_MIN_FRACTION * r_domain, points)
