"""
Marshmallow schemas for terms, shadow chains, run configurations and
extraction reports.

Term sums serialize as arrays of ``{sector, re, im, a, b, q, s}`` in the
canonical order of :class:`~eddycorner.term_algebra.TermSum`, so golden
files diff cleanly.
"""
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional

from marshmallow import (
    Schema, ValidationError, fields, post_load, pre_dump, validate, validates_schema
)

from .config import Config
from .exceptions import CornerError, DomainError
from .extraction import ExtractionReport, MomentVariant
from .shadow_engine import ChainKind, SectorPair, ShadowChain
from .singular_functions import MU0, DomainConfig
from .term_algebra import Sector, Term, TermSum
from .utils.config import ConfigError, parse_inverse_length, parse_length

COMMANDS = ('shadows', 'eval', 'solve', 'extract', 'reconstruct', 'verify-all')
METHODS = ('quasidual', 'moments')
MODES = ('solver', 'manufactured')


# ---------------------------------------------------------------------------
# Custom fields
# ---------------------------------------------------------------------------

class Length(fields.Float):
    """Length in meters; strings may carry a unit suffix (``'50 mm'``)."""

    def _deserialize(self, value, attr, data, **kwargs):
        try:
            return parse_length(value)
        except ConfigError as e:
            raise ValidationError(str(e)) from e


class InverseLength(fields.Float):
    """Inverse length in 1/m; strings may read ``'0.1414/mm'``."""

    def _deserialize(self, value, attr, data, **kwargs):
        try:
            return parse_inverse_length(value)
        except ConfigError as e:
            raise ValidationError(str(e)) from e


class ComplexField(fields.Field):
    """Complex number as ``[re, im]``."""

    def _serialize(self, value, attr, obj, **kwargs):
        if value is None:
            return None
        value = complex(value)
        return [value.real, value.imag]

    def _deserialize(self, value, attr, data, **kwargs):
        try:
            re, im = value
            return complex(float(re), float(im))
        except (TypeError, ValueError) as e:
            raise ValidationError('Expected [re, im]') from e


class TermSchema(Schema):
    sector = fields.String(required=True, validate=validate.OneOf([s.value for s in Sector]))
    re = fields.Float(required=True)
    im = fields.Float(required=True)
    a = fields.Integer(required=True)
    b = fields.Integer(required=True)
    q = fields.Integer(load_default=0, validate=validate.Range(min=0))
    s = fields.Integer(load_default=0, validate=validate.Range(min=0))

    @pre_dump
    def flatten(self, term: Term, **kwargs):
        return {'sector': term.sector.value, 're': term.coeff.real, 'im': term.coeff.imag,
                'a': term.a, 'b': term.b, 'q': term.q, 's': term.s}

    @post_load
    def make_term(self, data, **kwargs):
        try:
            return Term(Sector(data['sector']), complex(data['re'], data['im']),
                        data['a'], data['b'], data['q'], data['s'])
        except CornerError as e:
            raise ValidationError(str(e)) from e


class TermSumField(fields.Field):
    """A :class:`TermSum` as a list of terms of one sector."""

    def __init__(self, sector: Sector, **kwargs):
        super().__init__(**kwargs)
        self.sector = sector

    def _serialize(self, value: TermSum, attr, obj, **kwargs):
        return TermSchema(many=True).dump(value.terms)

    def _deserialize(self, value, attr, data, **kwargs):
        terms = TermSchema(many=True).load(value)
        try:
            return TermSum.from_terms(terms, sector=self.sector, prune=0.0)
        except CornerError as e:
            raise ValidationError(str(e)) from e


class SectorPairSchema(Schema):
    homogeneity = fields.Integer(required=True)
    minus = TermSumField(Sector.MINUS, required=True)
    plus = TermSumField(Sector.PLUS, required=True)

    @post_load
    def make_pair(self, data, **kwargs):
        try:
            return SectorPair(data['minus'], data['plus'], data['homogeneity'])
        except DomainError as e:
            raise ValidationError(str(e)) from e


class ShadowChainSchema(Schema):
    k = fields.Integer(required=True)
    kind = fields.String(required=True, validate=validate.OneOf([k.value for k in ChainKind]))
    omega = fields.Float(required=True)
    J = fields.Integer(required=True, validate=validate.Range(min=0))
    pairs = fields.List(fields.Nested(SectorPairSchema), required=True)

    @pre_dump
    def header(self, chain: ShadowChain, **kwargs):
        return {'k': chain.k, 'kind': chain.kind.value, 'omega': chain.omega, 'J': chain.J,
                'pairs': list(chain.pairs)}

    @validates_schema
    def check_depth(self, data, **kwargs):
        if len(data['pairs']) != data['J'] + 1:
            raise ValidationError(f"J={data['J']} but {len(data['pairs'])} pairs given", 'pairs')

    @post_load
    def make_chain(self, data, **kwargs):
        return ShadowChain(data['k'], ChainKind(data['kind']), data['omega'], tuple(data['pairs']))


def dump_chain(chain: ShadowChain) -> Dict[str, Any]:
    return ShadowChainSchema().dump(chain)


def load_chain(data: Mapping[str, Any]) -> ShadowChain:
    """
    Raises:
        ConfigError: If the data is not a valid chain
    """
    try:
        return ShadowChainSchema().load(data)
    except ValidationError as e:
        raise ConfigError(f'Invalid chain: {e.messages}') from e


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    """Validated inputs of one command-line run, embedded in every output it writes."""
    command: str
    omega: float = Config.OMEGA
    zeta: Optional[float] = None
    kappa: Optional[float] = None
    mu0: Optional[float] = None
    sigma: Optional[float] = None
    k: List[int] = field(default_factory=lambda: [0])
    p: List[int] = field(default_factory=lambda: [0])
    kind: str = ChainKind.PRIMAL.value
    m: int = 1
    J: int = 1
    method: str = 'quasidual'
    variant: str = MomentVariant.N1_TWO_TERMS.value
    mode: str = 'solver'
    r_domain: float = Config.R_DOMAIN
    r_small: float = Config.R_SMALL
    r_max: Optional[float] = None
    r_min: Optional[float] = None
    r_points: int = Config.SWEEP_POINTS
    n_r: int = Config.SOLVER_N_R
    n_theta: int = Config.SOLVER_N_THETA
    order: int = 2
    output: Optional[str] = None
    seed: int = 0

    def domain(self) -> DomainConfig:
        if self.kappa is None:
            return DomainConfig(self.omega, self.zeta)
        if self.zeta is None:
            return DomainConfig.from_physical(self.omega, self.kappa, self.sigma, self.mu0 or MU0)
        return DomainConfig(self.omega, self.zeta, self.kappa, self.mu0 or MU0, self.sigma)

    @property
    def radii_bounds(self):
        r_max = self.r_max if self.r_max is not None else Config.SWEEP_R_MAX_FRACTION * self.r_domain
        r_min = self.r_min if self.r_min is not None else Config.SWEEP_R_MIN_FRACTION * self.r_domain
        return r_max, r_min


class RunConfigSchema(Schema):
    command = fields.String(required=True, validate=validate.OneOf(COMMANDS))
    omega = fields.Float(load_default=Config.OMEGA,
                         validate=validate.Range(min=Config.OMEGA_MIN, max=2 * math.pi - Config.OMEGA_MIN))
    zeta = InverseLength(load_default=None, allow_none=True, validate=validate.Range(min=0))
    kappa = fields.Float(load_default=None, allow_none=True, validate=validate.Range(min=0, min_inclusive=False))
    mu0 = fields.Float(load_default=None, allow_none=True, validate=validate.Range(min=0, min_inclusive=False))
    sigma = fields.Float(load_default=None, allow_none=True, validate=validate.Range(min=0, min_inclusive=False))
    k = fields.List(fields.Integer(validate=validate.Range(min=0)), load_default=lambda: [0])
    p = fields.List(fields.Integer(validate=validate.OneOf([0, 1])), load_default=lambda: [0])
    kind = fields.String(load_default=ChainKind.PRIMAL.value, validate=validate.OneOf([k.value for k in ChainKind]))
    m = fields.Integer(load_default=1, validate=validate.Range(min=0))
    J = fields.Integer(load_default=1, validate=validate.Range(min=0))
    method = fields.String(load_default='quasidual', validate=validate.OneOf(METHODS))
    variant = fields.String(load_default=MomentVariant.N1_TWO_TERMS.value,
                            validate=validate.OneOf([v.value for v in MomentVariant]))
    mode = fields.String(load_default='solver', validate=validate.OneOf(MODES))
    r_domain = Length(load_default=Config.R_DOMAIN, validate=validate.Range(min=0, min_inclusive=False))
    r_small = Length(load_default=Config.R_SMALL, validate=validate.Range(min=0, min_inclusive=False))
    r_max = Length(load_default=None, allow_none=True, validate=validate.Range(min=0, min_inclusive=False))
    r_min = Length(load_default=None, allow_none=True, validate=validate.Range(min=0, min_inclusive=False))
    r_points = fields.Integer(load_default=Config.SWEEP_POINTS, validate=validate.Range(min=4))
    n_r = fields.Integer(load_default=Config.SOLVER_N_R, validate=validate.Range(min=64))
    n_theta = fields.Integer(load_default=Config.SOLVER_N_THETA, validate=validate.Range(min=8))
    order = fields.Integer(load_default=2, validate=validate.Range(min=0, max=3))
    output = fields.String(load_default=None, allow_none=True)
    seed = fields.Integer(load_default=0)

    @validates_schema
    def check_physics(self, data, **kwargs):
        given = [data.get(name) is not None for name in ('kappa', 'sigma')]
        if any(given) and not all(given):
            raise ValidationError('kappa and sigma must be given together', 'kappa')

    @validates_schema
    def check_radii(self, data, **kwargs):
        r_max, r_min = data.get('r_max'), data.get('r_min')
        if r_max is not None and r_max > data['r_domain']:
            raise ValidationError('r_max exceeds r_domain', 'r_max')
        if r_max is not None and r_min is not None and r_min >= r_max:
            raise ValidationError('r_min must be below r_max', 'r_min')

    @post_load
    def make_config(self, data, **kwargs):
        if data.get('zeta') is None and data.get('kappa') is None:
            data['zeta'] = Config.ZETA
        return RunConfig(**data)


def load_run_config(data: Mapping[str, Any]) -> RunConfig:
    """
    Validate ``data`` into a :class:`RunConfig`.

    Raises:
        ConfigError: If validation fails
    """
    try:
        run = RunConfigSchema().load(dict(data))
    except ValidationError as e:
        raise ConfigError(f'Invalid run configuration: {e.messages}') from e
    try:
        run.domain()
    except DomainError as e:
        raise ConfigError(f'Invalid run configuration: {e}') from e
    return run


def dump_run_config(run: RunConfig) -> Dict[str, Any]:
    return RunConfigSchema().dump(run)


# ---------------------------------------------------------------------------
# Extraction reports
# ---------------------------------------------------------------------------

class KeyedValueSchema(Schema):
    k = fields.Integer()
    p = fields.Integer()
    value = ComplexField()


def _keyed(values: Mapping) -> List[Dict[str, Any]]:
    return [{'k': k, 'p': p, 'value': v} for (k, p), v in sorted(values.items())]


class EstimateSchema(Schema):
    R = fields.Float()
    R0 = fields.Float()
    raw = fields.List(fields.Nested(KeyedValueSchema))
    corrected = fields.List(fields.Nested(KeyedValueSchema))

    @pre_dump
    def flatten(self, estimate, **kwargs):
        return {'R': estimate.R, 'R0': estimate.R0,
                'raw': _keyed(estimate.raw), 'corrected': _keyed(estimate.corrected)}


class SweepRowSchema(Schema):
    R = fields.Float()
    k = fields.Integer()
    p = fields.Integer()
    estimate = ComplexField()
    error = ComplexField()
    model_value = fields.Float()
    corrected = fields.Boolean()


class SlopeSchema(Schema):
    k = fields.Integer()
    p = fields.Integer()
    expected = fields.Float()
    slope = fields.Float(allow_none=True)
    exact = fields.Boolean()
    points = fields.Integer()
    model = fields.String()


class ExtractionReportSchema(Schema):
    """Dump-only view of an :class:`~eddycorner.extraction.ExtractionReport`."""
    method = fields.String()
    m = fields.Integer(allow_none=True)
    variant = fields.String(allow_none=True)
    omega = fields.Float()
    zeta = fields.Float()
    estimates = fields.List(fields.Nested(EstimateSchema))
    reference = fields.List(fields.Nested(KeyedValueSchema))
    sweep = fields.List(fields.Nested(SweepRowSchema))
    slopes = fields.List(fields.Nested(SlopeSchema))

    @pre_dump
    def flatten(self, report: ExtractionReport, **kwargs):
        slopes = [{'k': k, 'p': p, 'expected': fit.expected, 'slope': fit.slope, 'exact': fit.exact,
                   'points': fit.points, 'model': report.models[(k, p)].describe()}
                  for (k, p), fit in sorted(report.slopes.items())]
        return {
            'method': report.method, 'm': report.m, 'variant': report.variant,
            'omega': report.domain.omega, 'zeta': report.domain.zeta,
            'estimates': report.estimates, 'reference': _keyed(report.reference),
            'sweep': report.sweep, 'slopes': slopes,
        }


def load_coefficients(report_data: Mapping[str, Any]) -> Dict[tuple, complex]:
    """Corrected estimates at the smallest radius of a dumped report, keyed by ``(k, p)``."""
    estimates = report_data.get('estimates') or []
    if not estimates:
        raise ConfigError('The report holds no estimates')
    smallest = min(estimates, key=lambda e: e['R'])
    return {(item['k'], item['p']): complex(*item['value']) for item in smallest['corrected']}
