"""
Tests for the polar-grid reference solver.
"""
import math
import unittest

import numpy as np
from numpy.testing import assert_allclose

from eddycorner.config import Config
from eddycorner.exceptions import DomainError, SolverError
from eddycorner.reference_solver import (
    MIN_RINGS, PolarField, PolarGrid, disk_dirichlet, graded_radii, sector_weights, solve_disk, solve_polar,
)
from eddycorner.shadow_engine import ChainKind
from eddycorner.singular_functions import DomainConfig, SingularSeries
from eddycorner.verification import check_reference_values

OMEGA = math.pi / 4
RUN_SLOW = Config.RUN_SLOW_CHECKS


class TestGrid(unittest.TestCase):

    def test_graded_radii(self):
        radii = graded_radii(0.05, 128)
        self.assertEqual(radii.size, 128)
        self.assertEqual(radii[-1], 0.05)
        self.assertAlmostEqual(radii[0], Config.SOLVER_R_MIN_FRACTION * 0.05)
        self.assertTrue(np.all(np.diff(radii) > 0))

    def test_grading_is_raised_for_few_rings(self):
        radii = graded_radii(1.0, MIN_RINGS, grading=1.01, r_min_fraction=1e-8)
        self.assertEqual(radii.size, MIN_RINGS)
        self.assertEqual(radii[-1], 1.0)

    def test_sector_weights(self):
        thetas = [0.0, OMEGA / 2, math.pi, 2 * math.pi - OMEGA / 2, -0.1]
        assert_allclose(sector_weights(thetas, OMEGA), [1.0, 0.5, 0.0, 0.5, 1.0])

    def test_seam_must_be_a_grid_angle(self):
        grid = PolarGrid.uniform(1.0, 64, 32, OMEGA)
        self.assertEqual(grid.seam_index, 2)
        self.assertAlmostEqual(grid.thetas[grid.seam_index], OMEGA / 2)
        with self.assertRaises(SolverError):
            PolarGrid.uniform(1.0, 64, 60, OMEGA)

    def test_invalid_rings(self):
        with self.assertRaises(SolverError):
            PolarGrid.uniform(1.0, MIN_RINGS - 1, 64, OMEGA)
        with self.assertRaises(SolverError):
            PolarGrid(np.linspace(1.0, 0.01, 64), 64, OMEGA)


class TestPolarField(unittest.TestCase):
    """Interpolation of nodal values onto circles."""

    def setUp(self):
        self.grid = PolarGrid.uniform(1.0, 64, 64, OMEGA)
        self.domain = DomainConfig(OMEGA, 0.0)

    def test_polynomial_in_r_is_reproduced(self):
        field = PolarField.from_function(self.grid, lambda r, t: r + r ** 3, self.domain, center=0.0)
        theta = np.array([0.0, 0.2, 1.5, -3.0])
        for R in (0.005, 0.3, 0.77):
            A = field.field_on_circle(R)
            assert_allclose(A.value(theta), R + R ** 3, rtol=1e-12)
            assert_allclose(A.radial_derivative(theta), 1 + 3 * R ** 2, rtol=1e-10)

    def test_angular_interpolation(self):
        field = PolarField.from_function(self.grid, lambda r, t: r ** 2 * np.cos(2 * t), self.domain, center=0.0)
        theta = np.linspace(-math.pi, math.pi, 41)
        A = field.field_on_circle(0.5)
        assert_allclose(A.value(theta), 0.25 * np.cos(2 * theta), atol=1e-4)

    def test_circle_outside_disk(self):
        field = PolarField.from_function(self.grid, lambda r, t: r, self.domain)
        with self.assertRaises(DomainError):
            field.field_on_circle(1.5)
        with self.assertRaises(DomainError):
            field.field_on_circle(0.0)


class TestSolver(unittest.TestCase):

    def test_zero_zeta_center_is_boundary_mean(self):
        domain = DomainConfig(OMEGA, 0.0)
        field = solve_disk(domain, r_domain=1.0, n_r=64, n_theta=64, graded=False)
        self.assertAlmostEqual(field.center.real, 0.25, places=12)
        self.assertAlmostEqual(field.center.imag, 0.0, places=12)

    def test_solution_is_even_in_theta(self):
        domain = DomainConfig(OMEGA, 20.0)
        field = solve_disk(domain, r_domain=0.05, n_r=64, n_theta=64)
        n = field.grid.n_theta
        assert_allclose(field.values[:, 1:], field.values[:, :0:-1], atol=1e-12)
        assert_allclose(field.boundary, disk_dirichlet(field.grid.thetas))
        self.assertLess(field.residual, Config.SOLVER_RESIDUAL_TOLERANCE)
        self.assertEqual(field.metadata['unknowns'], 1 + 63 * n)

    def test_omega_mismatch(self):
        grid = PolarGrid.uniform(1.0, 64, 64, OMEGA)
        with self.assertRaises(SolverError):
            solve_polar(grid, DomainConfig(math.pi / 2, 1.0))

    def test_manufactured_solution_converges(self):
        domain = DomainConfig(OMEGA, 1.0)
        exact = SingularSeries.build(0, 0, ChainKind.PRIMAL, 2, domain)
        errors = []
        for n in (64, 128):
            grid = PolarGrid.uniform(1.0, n, n, OMEGA)
            field = solve_polar(grid, domain, dirichlet=lambda t: exact(1.0, t), source=exact.residual_values)
            rr, tt = np.meshgrid(grid.radii, grid.thetas, indexing='ij')
            nodal = np.max(np.abs(field.values - exact(rr, tt)))
            errors.append(max(nodal, abs(field.center - 1.0)))
        order = math.log2(errors[0] / errors[1])
        self.assertGreaterEqual(order, 1.5, msg=f'errors {errors}')

    def test_coarse_disk_center_value(self):
        domain = DomainConfig(OMEGA, Config.ZETA)
        field = solve_disk(domain, r_domain=Config.R_DOMAIN, n_r=128, n_theta=128)
        tolerances = {'A_center': 0.05, 'J_K10': math.inf, 'J_K20': math.inf, 'J_K30': math.inf}
        results = check_reference_values(field.family(), domain, Config.R_SMALL, tolerances)
        center = next(r for r in results if r.name == 'reference A_center')
        self.assertTrue(center.passed, msg=center.detail)

    @unittest.skipUnless(RUN_SLOW, 'set EDDYCORNER_RUN_SLOW=1 to solve the 512x512 disk problem')
    def test_disk_reference_values(self):
        domain = DomainConfig(OMEGA, Config.ZETA)
        field = solve_disk(domain, r_domain=Config.R_DOMAIN, n_r=512, n_theta=512)
        for result in check_reference_values(field.family(), domain, Config.R_SMALL):
            self.assertTrue(result.passed, msg=f'{result.name}: {result.detail}')


if __name__ == '__main__':
    unittest.main()
