"""
Command-line front end.

Commands build chains, evaluate singular functions, solve the disk test
problem, run extraction sweeps, reconstruct the field near the corner and
run the numerical self-checks. Every command validates its inputs into a
:class:`~eddycorner.schemas.RunConfig` and embeds it in the files it writes.
"""
import logging
import math
from pathlib import Path
from typing import Any, Dict, Optional

import click
import numpy as np
import yaml

from . import __version__
from .app_factory import create_app
from .error_handlers import CornerGroup, handle_errors
from .exceptions import VerificationError
from .extraction import (
    MomentVariant, convergence_study, geometric_radii, manufactured_family,
    quasidual_extract, reconstruct,
)
from .reference_solver import solve_disk
from .schemas import (
    ExtractionReportSchema, RunConfig, dump_chain, dump_run_config, load_coefficients, load_run_config,
)
from .shadow_engine import ChainKind, verify_chain
from .singular_functions import grid_rows, render_chain
from .utils.config import ConfigError
from .utils.io import read_json, write_csv, write_json
from .verification import GOLDEN_TOLERANCE, first_shadow_deviation, run_all

logger = logging.getLogger(__name__)

FIELD_COLUMNS = ('r', 'theta', 're', 'im')
SWEEP_COLUMNS = ('R', 'k', 'p', 'estimate_re', 'estimate_im', 'err_re', 'err_im', 'err_abs',
                 'model_value', 'corrected_flag')
DEFAULT_MANUFACTURED = {(0, 0): 1.0, (1, 0): 2.0, (2, 0): -0.5}

# run options that fall back to the settings of the active configuration
SETTING_DEFAULTS = {
    'omega': 'OMEGA', 'zeta': 'ZETA', 'r_domain': 'R_DOMAIN', 'r_small': 'R_SMALL',
    'r_points': 'SWEEP_POINTS', 'n_r': 'SOLVER_N_R', 'n_theta': 'SOLVER_N_THETA',
}


def _load_config_file(ctx: click.Context, param: click.Parameter, value: Optional[str]):
    if not value:
        return value
    try:
        with open(value, encoding='utf-8') as fh:
            data = yaml.safe_load(fh) or {}
    except (OSError, yaml.YAMLError) as e:
        raise click.BadParameter(f'Cannot read {value}: {e}', ctx, param)
    if not isinstance(data, dict):
        raise click.BadParameter(f'{value} must hold key: value pairs', ctx, param)
    defaults = {key.replace('-', '_'): v for key, v in data.items() if key != 'command'}
    ctx.default_map = {name: defaults for name in ctx.command.commands}
    return value


def _run_config(ctx: click.Context, params: Dict[str, Any]) -> RunConfig:
    """Validate the command's parameters; unset options fall back to the active settings, then to the schema."""
    data = {key: value for key, value in params.items() if value is not None and value != ()}
    for key in ('k', 'p'):
        if key in data:
            data[key] = list(data[key])
    settings = ctx.obj.config if ctx.obj is not None else {}
    for key, name in SETTING_DEFAULTS.items():
        if key in params and key not in data and name in settings:
            if key == 'zeta' and 'kappa' in data:
                continue
            data[key] = settings[name]
    data['command'] = ctx.info_name
    run = load_run_config(data)
    logger.debug('run configuration: %s', dump_run_config(run))
    return run


def _output_dir(run: RunConfig) -> Path:
    app = click.get_current_context().obj
    return Path(run.output) if run.output else app.output_dir


def physics_options(f):
    f = click.option('--mu0', type=float, help='Permeability of vacuum in H/m')(f)
    f = click.option('--sigma', type=float, help='Conductivity in S/m')(f)
    f = click.option('--kappa', type=float, help='Angular frequency in 1/s')(f)
    f = click.option('--zeta', type=str, help="Skin parameter, e.g. '0.1414/mm' (bare numbers are 1/m)")(f)
    f = click.option('--omega', type=float, help='Opening angle of the conducting sector')(f)
    return f


def output_option(f):
    return click.option('--output', '-o', type=click.Path(file_okay=False),
                        help='Output directory (defaults to OUTPUT_DIR)')(f)


def radii_options(f):
    f = click.option('--r-points', type=int, help='Number of circle radii in a sweep')(f)
    f = click.option('--r-min', type=str, help="Smallest sweep radius, e.g. '5um'")(f)
    f = click.option('--r-max', type=str, help="Largest sweep radius, e.g. '20mm'")(f)
    return f


@click.group(cls=CornerGroup)
@click.option('--config-name', default=None, help='development, testing, reproduction or default')
@click.option('--config-file', type=click.Path(dir_okay=False), callback=_load_config_file, is_eager=True,
              expose_value=False, help='YAML file of option defaults')
@click.version_option(version=__version__, prog_name='eddycorner')
@click.pass_context
def cli(ctx: click.Context, config_name: Optional[str]):
    """Corner singularities of the eddy-current operator."""
    try:
        ctx.obj = create_app(config_name)
    except ConfigError as e:
        raise click.UsageError(str(e))


@cli.command()
@click.option('--k', 'k', type=int, multiple=True, help='Leading exponent (repeatable)')
@click.option('--p', 'p', type=int, multiple=True, help='Part: 0 for Re, 1 for Im (repeatable)')
@click.option('--kind', type=click.Choice([k.value for k in ChainKind]))
@click.option('--J', 'J', type=int, help='Number of shadows after the leading term')
@click.option('--verify', is_flag=True, help='Check residuals and closed forms; exit 2 on failure')
@physics_options
@output_option
@click.pass_context
@handle_errors
def shadows(ctx, verify, **params):
    """Build shadow chains, dump them as JSON and print their real forms."""
    run = _run_config(ctx, params)
    app = ctx.obj
    kind = ChainKind(run.kind)
    out = _output_dir(run)
    failures = []
    for k in run.k:
        chain = app.chain(k, kind, run.J, run.omega)
        write_json(out / f'chain_{kind.value}_k{k}_J{run.J}.json', dump_chain(chain), dump_run_config(run))
        for p in run.p:
            if k == 0 and p == 1:
                continue
            click.echo(render_chain(chain, p))
            if verify and run.J >= 1:
                deviation = first_shadow_deviation(k, p, kind, run.omega)
                if deviation > GOLDEN_TOLERANCE:
                    failures.append(f'k={k} p={p}: closed form deviation {deviation:.2e}')
        if verify:
            failures.extend(f'k={k}: {failure}' for failure in verify_chain(chain))
    if failures:
        raise VerificationError('; '.join(failures))
    if verify:
        click.echo('verification passed')


@cli.command('eval')
@click.option('--k', 'k', type=int, multiple=True)
@click.option('--p', 'p', type=int, multiple=True)
@click.option('--kind', type=click.Choice([k.value for k in ChainKind]))
@click.option('--m', type=int, help='Truncation order')
@click.option('--n-theta', type=int, help='Number of angles of the grid')
@physics_options
@radii_options
@output_option
@click.pass_context
@handle_errors
def evaluate_command(ctx, **params):
    """Evaluate S^{k,p}_m or K^{k,p}_m on an (r, theta) grid and write CSV rows."""
    run = _run_config(ctx, params)
    domain = run.domain()
    r_max, r_min = run.radii_bounds
    radii = geometric_radii(r_max, r_min, run.r_points)
    thetas = np.linspace(-math.pi, math.pi, run.n_theta, endpoint=False)
    out = _output_dir(run)
    for k in run.k:
        for p in run.p:
            if k == 0 and p == 1:
                continue
            series = ctx.obj.series(k, p, ChainKind(run.kind), run.m, domain)
            rows = [dict(zip(FIELD_COLUMNS, row)) for row in grid_rows(series, radii, thetas)]
            path = write_csv(out / f'eval_{run.kind}_k{k}_p{p}_m{run.m}.csv', rows, FIELD_COLUMNS,
                             dump_run_config(run))
            click.echo(f'{series!r}: {len(rows)} points -> {path}')


def _solve(run: RunConfig):
    return solve_disk(run.domain(), run.r_domain, run.n_r, run.n_theta)


@cli.command()
@click.option('--r-domain', type=str, help="Disk radius, e.g. '50mm'")
@click.option('--n-r', type=int, help='Number of rings')
@click.option('--n-theta', type=int, help='Number of angles (omega/2 must be a grid angle)')
@physics_options
@output_option
@click.pass_context
@handle_errors
def solve(ctx, **params):
    """Solve the disk test problem and write the nodal field."""
    run = _run_config(ctx, params)
    field = _solve(run)
    rows = [{'r': 0.0, 'theta': 0.0, 're': field.center.real, 'im': field.center.imag}]
    for i, r in enumerate(field.grid.radii):
        for j, theta in enumerate(field.grid.thetas):
            value = field.values[i, j]
            rows.append({'r': float(r), 'theta': float(theta), 're': value.real, 'im': value.imag})
    path = write_csv(_output_dir(run) / 'field.csv', rows, FIELD_COLUMNS, dump_run_config(run))
    click.echo(f'A(c) = {field.center:.9g} (residual {field.residual:.1e}) -> {path}')


def _parse_coefficients(values) -> Dict[tuple, complex]:
    try:
        return {(int(k), int(p)): complex(value.replace(' ', '')) for k, p, value in values}
    except ValueError as e:
        raise ConfigError(f'Cannot parse coefficient: {e}') from e


@cli.command()
@click.option('--mode', type=click.Choice(['solver', 'manufactured']))
@click.option('--method', type=click.Choice(['quasidual', 'moments']))
@click.option('--variant', type=click.Choice([v.value for v in MomentVariant]))
@click.option('--k', 'k', type=int, multiple=True, help='Coefficients Lambda^{k,p} to extract, k <= max')
@click.option('--p', 'p', type=int, multiple=True)
@click.option('--m', type=int, help='Order of the quasi-dual functions')
@click.option('--coefficient', 'coefficients', type=(int, int, str), multiple=True,
              help='Manufactured coefficient: K P VALUE, e.g. 1 0 2+0.5j')
@click.option('--r-domain', type=str)
@click.option('--r-small', type=str, help='Radius of the reference extraction in solver mode')
@click.option('--n-r', type=int)
@click.option('--n-theta', type=int)
@physics_options
@radii_options
@output_option
@click.pass_context
@handle_errors
def extract(ctx, coefficients, **params):
    """Sweep an extractor over circle radii and fit the decay of its error."""
    run = _run_config(ctx, params)
    domain = run.domain()
    r_max, r_min = run.radii_bounds
    radii = geometric_radii(r_max, r_min, run.r_points)
    if run.mode == 'manufactured':
        manufactured = _parse_coefficients(coefficients) if coefficients else DEFAULT_MANUFACTURED
        family = manufactured_family(manufactured, domain)
        reference, r_small = manufactured, None
    else:
        family = _solve(run).family()
        reference, r_small = None, run.r_small
    report = convergence_study(run.method, family, domain, radii, reference, m=run.m, k_max=max(run.k),
                               variant=run.variant, parts=run.p, r_small=r_small)
    config_data = dump_run_config(run)
    out = _output_dir(run)
    write_csv(out / f'extract_{run.method}.csv', report.csv_rows(), SWEEP_COLUMNS, config_data)
    write_json(out / f'extract_{run.method}.json', ExtractionReportSchema().dump(report), config_data)
    for (k, p), fit in sorted(report.slopes.items()):
        slope = 'exact' if fit.exact else f'{fit.slope:.3f}'
        click.echo(f'Lambda^{{{k},{p}}} = {report.estimate((k, p)):.9g}  slope {slope} '
                   f'(model {report.models[(k, p)].describe()}, exponent {fit.expected:.0f})')


@cli.command('reconstruct')
@click.option('--order', type=int, help='Composite order 0 to 3')
@click.option('--coefficients-file', type=click.Path(exists=True, dir_okay=False),
              help='JSON report written by extract; otherwise the disk problem is solved')
@click.option('--m', type=int)
@click.option('--n-theta', type=int)
@click.option('--r-domain', type=str)
@click.option('--r-small', type=str)
@click.option('--n-r', type=int)
@physics_options
@radii_options
@output_option
@click.pass_context
@handle_errors
def reconstruct_command(ctx, coefficients_file, **params):
    """Evaluate the partial singular expansion near the corner, next to the solved field."""
    run = _run_config(ctx, params)
    domain = run.domain()
    field = None
    if coefficients_file:
        data, _ = read_json(coefficients_file)
        coefficients = load_coefficients(data)
    else:
        field = _solve(run)
        report = quasidual_extract(field.family(), domain, 3, max(run.m, 1), [run.r_small], parts=(0,))
        coefficients = report.estimates[0].corrected
    r_max, r_min = run.radii_bounds
    radii = geometric_radii(r_max, r_min, run.r_points)
    thetas = np.linspace(-math.pi, math.pi, field.grid.n_theta if field else 64, endpoint=False)
    rows = []
    for R in radii:
        values = reconstruct(coefficients, domain, run.order, np.full(thetas.shape, R), thetas)
        solved = field.field_on_circle(float(R)).value(thetas) if field else np.full(thetas.shape, np.nan)
        for theta, value, reference in zip(thetas, values, solved):
            rows.append({'r': float(R), 'theta': float(theta), 're': value.real, 'im': value.imag,
                         'field_re': float(np.real(reference)), 'field_im': float(np.imag(reference))})
    columns = FIELD_COLUMNS + ('field_re', 'field_im')
    path = write_csv(_output_dir(run) / f'reconstruct_order{run.order}.csv', rows, columns, dump_run_config(run))
    click.echo(f'{len(rows)} points -> {path}')


@cli.command('verify-all')
@click.option('--reproduce', is_flag=True, help='Also solve the disk problem and compare reference values')
@click.option('--n-r', type=int)
@click.option('--n-theta', type=int)
@physics_options
@click.pass_context
@handle_errors
def verify_all(ctx, reproduce, **params):
    """Run the numerical self-checks; exit 2 if any fails."""
    run = _run_config(ctx, params)
    if reproduce:
        domain = run.domain()
        field = _solve(run)
        results = run_all(field.family(), domain, run.r_small)
    else:
        results = run_all()
    for result in results:
        click.echo(f"{'PASS' if result.passed else 'FAIL'}  {result.name}: {result.detail}")
    failed = [r.name for r in results if not r.passed]
    if failed:
        raise VerificationError(f'{len(failed)} checks failed: {", ".join(failed)}')
    click.echo(f'all {len(results)} checks passed')


def main():
    cli(prog_name='eddycorner')

