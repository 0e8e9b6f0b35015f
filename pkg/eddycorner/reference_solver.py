"""
Finite-volume reference solver on a polar grid centered at the corner.

Solves ``-Laplace A + 4 i zeta^2 1_{S-} A = f`` in the disk of radius
``R_domain`` with Dirichlet data on the boundary circle (``|theta| / 2 pi``
by default). The rays ``theta = +-omega/2`` are grid lines; cells cut by a
ray carry half of the zeroth-order coefficient. Transmission conditions
hold through the flux form, since the coefficient jump sits in the
zeroth-order term only.
"""
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np
from numpy.typing import ArrayLike
from scipy import sparse
from scipy.interpolate import CubicSpline
from scipy.sparse.linalg import splu
from typing_extensions import TypeAlias

from .config import Config
from .exceptions import DomainError, SolverError
from .extraction import FieldOnCircle, Provenance
from .singular_functions import DomainConfig
from .utils.validators import validate_positive

logger = logging.getLogger(__name__)

RadialFunction: TypeAlias = Callable[[np.ndarray, np.ndarray], np.ndarray]
BoundaryFunction: TypeAlias = Callable[[np.ndarray], np.ndarray]

MIN_RINGS = 64
STENCIL = 5
SEAM_OFFSET = 1e-12


def disk_dirichlet(theta: ArrayLike) -> np.ndarray:
    """Boundary data ``|theta| / 2 pi`` with ``theta`` wrapped to ``(-pi, pi]``."""
    return np.abs(np.angle(np.exp(1j * np.asarray(theta, dtype=float)))) / (2 * math.pi)


def sector_weights(theta: ArrayLike, omega: float, tol: float = 1e-9) -> np.ndarray:
    """Fraction of the cell at angle ``theta`` lying in S-: 1 inside, 1/2 on a ray, 0 outside."""
    wrapped = np.abs(np.angle(np.exp(1j * np.asarray(theta, dtype=float))))
    half = omega / 2
    return np.where(np.abs(wrapped - half) <= tol, 0.5, np.where(wrapped < half, 1.0, 0.0))


def graded_radii(r_domain: float, n_r: int, grading: float = Config.SOLVER_GRADING,
                 r_min_fraction: float = Config.SOLVER_R_MIN_FRACTION) -> np.ndarray:
    """
    ``n_r`` radii ending at ``r_domain``: geometric from ``r_min_fraction * r_domain``,
    then uniform once the geometric step reaches the uniform one.

    The ratio is raised above ``grading`` when ``n_r`` nodes cannot reach
    ``r_domain`` otherwise.
    """
    r_min = r_min_fraction * r_domain
    ratio = grading
    for _ in range(200):
        radii = [r_min]
        while len(radii) < n_r:
            r = radii[-1]
            remaining = n_r - len(radii)
            uniform_step = (r_domain - r) / remaining
            if r * (ratio - 1) >= uniform_step:
                radii.extend(r + uniform_step * np.arange(1, remaining + 1))
                break
            radii.append(r * ratio)
        if len(radii) == n_r and math.isclose(radii[-1], r_domain, rel_tol=1e-12):
            radii[-1] = r_domain
            return np.array(radii)
        ratio = 1 + (ratio - 1) * 1.1
    raise SolverError(f'Cannot grade {n_r} radii down to {r_min:g}')


@dataclass(frozen=True)
class PolarGrid:
    """Rings ``radii[0] < ... < radii[-1] = R_domain`` and angles ``2 pi j / n_theta``."""
    radii: np.ndarray
    n_theta: int
    omega: float

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float)
        if radii.ndim != 1 or radii.size < MIN_RINGS:
            raise SolverError(f'A polar grid needs at least {MIN_RINGS} rings')
        if radii[0] <= 0 or np.any(np.diff(radii) <= 0):
            raise SolverError('Radii must be positive and increasing')
        seam = self.n_theta * self.omega / (4 * math.pi)
        if self.n_theta < 8 or abs(seam - round(seam)) > 1e-9 or round(seam) < 1:
            raise SolverError(
                f'n_theta={self.n_theta} does not place theta=omega/2={self.omega / 2:.6g} on a grid angle'
            )
        object.__setattr__(self, 'radii', radii)

    @classmethod
    def graded(cls, r_domain: float, n_r: int, n_theta: int, omega: float,
               grading: float = Config.SOLVER_GRADING,
               r_min_fraction: float = Config.SOLVER_R_MIN_FRACTION) -> 'PolarGrid':
        return cls(graded_radii(r_domain, n_r, grading, r_min_fraction), n_theta, omega)

    @classmethod
    def uniform(cls, r_domain: float, n_r: int, n_theta: int, omega: float) -> 'PolarGrid':
        return cls(r_domain * np.arange(1, n_r + 1) / n_r, n_theta, omega)

    @property
    def r_domain(self) -> float:
        return float(self.radii[-1])

    @property
    def n_r(self) -> int:
        return self.radii.size

    @property
    def thetas(self) -> np.ndarray:
        return 2 * math.pi * np.arange(self.n_theta) / self.n_theta

    @property
    def seam_index(self) -> int:
        """Index ``j`` with ``theta_j = omega / 2``."""
        return int(round(self.n_theta * self.omega / (4 * math.pi)))


@dataclass
class PolarField:
    """
    Complex nodal values of a field on a :class:`PolarGrid`.

    ``values[i, j]`` sits at ``(radii[i], thetas[j])``; the last ring holds
    the Dirichlet data and ``center`` the value at the corner.
    """
    grid: PolarGrid
    center: complex
    values: np.ndarray
    domain: DomainConfig
    residual: float = 0.0
    metadata: Dict[str, float] = field(default_factory=dict)

    @classmethod
    def from_function(cls, grid: PolarGrid, f: RadialFunction, domain: DomainConfig,
                      center: Optional[complex] = None) -> 'PolarField':
        """Sample ``f(r, theta)`` on the grid; the center defaults to the first-ring mean."""
        rr, tt = np.meshgrid(grid.radii, grid.thetas, indexing='ij')
        values = np.asarray(f(rr, tt), dtype=complex).reshape(rr.shape)
        if center is None:
            center = complex(values[0].mean())
        return cls(grid, complex(center), values, domain)

    @property
    def boundary(self) -> np.ndarray:
        return self.values[-1]

    def _radial_stencil(self, R: float):
        nodes = np.concatenate([[0.0], self.grid.radii])
        columns = np.vstack([np.full(self.grid.n_theta, self.center), self.values])
        upper = int(np.searchsorted(nodes, R))
        start = min(max(upper - STENCIL // 2, 0), nodes.size - STENCIL)
        return nodes[start:start + STENCIL], columns[start:start + STENCIL]

    def rings_at(self, R: float):
        """Value and radial derivative at ``r = R`` on every grid angle (5-point Lagrange in r)."""
        R = validate_positive('R', R)
        if R > self.grid.r_domain * (1 + 1e-12):
            raise DomainError(f'R={R} lies outside the disk of radius {self.grid.r_domain}')
        nodes, columns = self._radial_stencil(R)
        weights = np.zeros(nodes.size)
        dweights = np.zeros(nodes.size)
        for a in range(nodes.size):
            others = np.delete(nodes, a)
            denom = np.prod(nodes[a] - others)
            weights[a] = np.prod(R - others) / denom
            dweights[a] = sum(np.prod(R - np.delete(others, b)) for b in range(others.size)) / denom
        return weights @ columns, dweights @ columns

    def _arc_splines(self, ring: np.ndarray):
        grid = self.grid
        s = grid.seam_index
        thetas = grid.thetas
        minus_idx = np.concatenate([np.arange(grid.n_theta - s, grid.n_theta), np.arange(0, s + 1)])
        minus_angles = np.concatenate([thetas[grid.n_theta - s:] - 2 * math.pi, thetas[:s + 1]])
        plus_idx = np.arange(s, grid.n_theta - s + 1) % grid.n_theta
        plus_angles = np.concatenate([thetas[s:grid.n_theta - s], [2 * math.pi - thetas[s]]])
        return (CubicSpline(minus_angles, ring[minus_idx]),
                CubicSpline(plus_angles, ring[plus_idx]))

    def _angular_interpolant(self, ring: np.ndarray) -> BoundaryFunction:
        minus, plus = self._arc_splines(ring)
        half = self.grid.omega / 2

        def interpolant(theta):
            wrapped = np.angle(np.exp(1j * np.asarray(theta, dtype=float)))
            return np.where(np.abs(wrapped) <= half, minus(wrapped), plus(np.mod(wrapped, 2 * math.pi)))

        return interpolant

    def field_on_circle(self, R: float) -> FieldOnCircle:
        """
        Interpolated trace on ``r = R``: Lagrange in ``r``, then one cubic spline per arc.

        Raises:
            DomainError: If ``R`` is not in ``(0, R_domain]``
        """
        value, derivative = self.rings_at(R)
        return FieldOnCircle(R, self._angular_interpolant(value), self._angular_interpolant(derivative),
                             Provenance.SOLVED)

    def family(self):
        """``R -> field_on_circle(R)``, the input of the extractors."""
        return self.field_on_circle


def _face_coefficients(radii: np.ndarray):
    """Radial faces and cell widths; the first cell reaches down to ``radii[0] / 2``."""
    nodes = np.concatenate([[0.0], radii])
    faces = (nodes[:-1] + nodes[1:]) / 2
    outer = np.concatenate([faces[1:], [radii[-1]]])
    return faces, outer, outer - faces


def _sample_source(source: RadialFunction, grid: PolarGrid, radii: np.ndarray) -> np.ndarray:
    rr, tt = np.meshgrid(radii, grid.thetas, indexing='ij')
    values = np.asarray(source(rr, tt), dtype=complex).reshape(rr.shape)
    for j in (grid.seam_index, grid.n_theta - grid.seam_index):
        theta = grid.thetas[j]
        r = radii
        both = (np.asarray(source(r, np.full(r.shape, theta - SEAM_OFFSET)), dtype=complex)
                + np.asarray(source(r, np.full(r.shape, theta + SEAM_OFFSET)), dtype=complex))
        values[:, j] = both / 2
    return values


def solve_polar(grid: PolarGrid, domain: DomainConfig, dirichlet: BoundaryFunction = disk_dirichlet,
                source: Optional[RadialFunction] = None,
                tolerance: float = Config.SOLVER_RESIDUAL_TOLERANCE) -> PolarField:
    """
    Assemble and solve the finite-volume system on ``grid``.

    Unknowns are the corner value and the nodes of every ring but the
    last; the boundary ring is eliminated into the right-hand side. Rows
    are scaled by ``r^2`` over the cell area.

    Raises:
        SolverError: If the factorization fails or the residual exceeds ``tolerance``
    """
    if abs(grid.omega - domain.omega) > 1e-12:
        raise SolverError(f'Grid built for omega={grid.omega}, domain has omega={domain.omega}')
    started = time.perf_counter()
    n_theta = grid.n_theta
    inner = grid.radii[:-1]
    n_inner = inner.size
    dtheta = 2 * math.pi / n_theta
    izeta2 = domain.izeta2
    weights = sector_weights(grid.thetas, grid.omega)
    boundary = np.asarray(dirichlet(grid.thetas), dtype=complex)

    def index(i, j):
        return 1 + i * n_theta + np.mod(j, n_theta)

    nodes = np.concatenate([[0.0], grid.radii])
    faces, outer, widths = _face_coefficients(grid.radii)
    rows, cols, data = [], [], []
    rhs = np.zeros(1 + n_inner * n_theta, dtype=complex)

    i_idx, j_idx = np.meshgrid(np.arange(n_inner), np.arange(n_theta), indexing='ij')
    i_idx, j_idx = i_idx.ravel(), j_idx.ravel()
    r = inner[i_idx]
    area = r * widths[i_idx] * dtheta
    scale = r ** 2 / area
    row = index(i_idx, j_idx)
    inward = faces[i_idx] * dtheta / (nodes[i_idx + 1] - nodes[i_idx])
    outward = outer[i_idx] * dtheta / (nodes[i_idx + 2] - nodes[i_idx + 1])
    angular = widths[i_idx] / (r * dtheta)

    diagonal = inward + outward + 2 * angular + 4 * izeta2 * weights[j_idx] * area
    rows.append(row)
    cols.append(row)
    data.append(scale * diagonal)
    for offset in (-1, 1):
        rows.append(row)
        cols.append(index(i_idx, j_idx + offset))
        data.append(-scale * angular)
    first = i_idx == 0
    rows.append(row[first])
    cols.append(np.zeros(np.count_nonzero(first), dtype=int))
    data.append(-(scale * inward)[first])
    rows.append(row[~first])
    cols.append(index(i_idx[~first] - 1, j_idx[~first]))
    data.append(-(scale * inward)[~first])
    last = i_idx == n_inner - 1
    rows.append(row[~last])
    cols.append(index(i_idx[~last] + 1, j_idx[~last]))
    data.append(-(scale * outward)[~last])
    rhs[row[last]] += (scale * outward)[last] * boundary[j_idx[last]]
    if source is not None:
        rhs[row] += scale * area * _sample_source(source, grid, inner).ravel()

    # corner: (4 / r0^2)(u_c - mean of the first ring) + 4 i zeta^2 (omega / 2 pi) u_c, times r0^2
    r0 = grid.radii[0]
    rows.append(np.array([0]))
    cols.append(np.array([0]))
    data.append(np.array([4.0 + 4 * izeta2 * r0 ** 2 * grid.omega / (2 * math.pi)]))
    rows.append(np.zeros(n_theta, dtype=int))
    cols.append(index(0, np.arange(n_theta)))
    data.append(np.full(n_theta, -4.0 / n_theta))
    if source is not None:
        rhs[0] += r0 ** 2 * complex(np.mean(_sample_source(source, grid, np.array([r0 / 4]))))

    size = rhs.size
    matrix = sparse.coo_matrix(
        (np.concatenate(data).astype(complex), (np.concatenate(rows), np.concatenate(cols))),
        shape=(size, size),
    ).tocsc()
    try:
        solution = splu(matrix).solve(rhs)
    except RuntimeError as e:
        raise SolverError(f'Factorization failed: {e}') from e
    norm = max(np.linalg.norm(rhs), 1e-300)
    residual = float(np.linalg.norm(matrix @ solution - rhs) / norm)
    if not np.all(np.isfinite(solution)) or residual > tolerance:
        raise SolverError(f'Linear solve residual {residual:.3e} exceeds {tolerance:g}')

    values = np.vstack([solution[1:].reshape(n_inner, n_theta), boundary[None, :]])
    elapsed = time.perf_counter() - started
    logger.info('solved %dx%d polar grid in %.2fs (residual %.2e)', grid.n_r, n_theta, elapsed, residual)
    return PolarField(grid, complex(solution[0]), values, domain, residual,
                      {'elapsed': elapsed, 'unknowns': float(size)})


def solve_disk(domain: DomainConfig, r_domain: float = Config.R_DOMAIN, n_r: int = Config.SOLVER_N_R,
               n_theta: int = Config.SOLVER_N_THETA, graded: bool = True) -> PolarField:
    """The disk test problem: no source, boundary data ``|theta| / 2 pi``."""
    r_domain = validate_positive('R_domain', r_domain)
    if graded:
        grid = PolarGrid.graded(r_domain, n_r, n_theta, domain.omega)
    else:
        grid = PolarGrid.uniform(r_domain, n_r, n_theta, domain.omega)
    return solve_polar(grid, domain)
