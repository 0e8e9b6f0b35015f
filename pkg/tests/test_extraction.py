"""
Tests for the coefficient extractors.

Manufactured fields ``sum Lambda^{k,p} S^{k,p}_m`` have known coefficients,
so the estimates and the decay of their errors can be checked directly.
"""
import math
import unittest

import numpy as np

from eddycorner.exceptions import DomainError, ExtractionError
from eddycorner.extraction import (
    FieldOnCircle, ModelTerm, MomentVariant, R0, RemainderModel, SlopeFit, convergence_study, coupling_coefficient,
    default_radii, fit_slope, form_J, form_M, geometric_radii, manufactured_family, moment,
    moment_coefficients, moments_extract, moments_model, quasidual_extract, quasidual_model, reconstruct,
)
from eddycorner.shadow_engine import ChainKind
from eddycorner.singular_functions import DomainConfig, SingularSeries
from eddycorner.verification import (
    RATE_SLACK, check_coupling, check_manufactured_rates, check_zero_zeta_exactness, coupling_closed_form,
    rate_within_slack,
)

OMEGA = math.pi / 4
MANUFACTURED = {(0, 0): 1.0, (1, 0): 2.0, (2, 0): -0.5}


class TestCircleFunctionals(unittest.TestCase):

    def test_moment_of_constant(self):
        A = FieldOnCircle.constant(3.0 - 1j, 0.5)
        self.assertAlmostEqual(moment(0, 0, A, OMEGA), 3.0 - 1j, places=12)
        self.assertAlmostEqual(moment(1, 0, A, OMEGA), 0.0, places=12)

    def test_form_M_of_harmonic_polynomials(self):
        domain = DomainConfig(OMEGA, 0.0)
        s = SingularSeries.build(2, 1, ChainKind.PRIMAL, 0, domain)
        A = FieldOnCircle.from_series([(1.0, s)], 0.5)
        # int (R^2 sin 2t)^2 dt = pi R^4
        self.assertAlmostEqual(form_M(s, A, OMEGA), math.pi * 0.5 ** 4, places=12)

    def test_form_J_pairs_dual_and_primal(self):
        domain = DomainConfig(OMEGA, 0.0)
        for k in (1, 2, 3):
            K = SingularSeries.build(k, 0, ChainKind.DUAL, 0, domain)
            S = SingularSeries.build(k, 0, ChainKind.PRIMAL, 0, domain)
            for R in (0.2, 0.9):
                self.assertAlmostEqual(form_J(K, FieldOnCircle.from_series([(1.0, S)], R)), 1.0, places=11)
            other = SingularSeries.build(k + 1, 0, ChainKind.PRIMAL, 0, domain)
            self.assertAlmostEqual(form_J(K, FieldOnCircle.from_series([(1.0, other)], 0.7)), 0.0, places=11)

    def test_small_parameter(self):
        self.assertAlmostEqual(R0(math.exp(-4), 2.0), 2 * math.exp(-4) * 3)
        np.testing.assert_allclose(R0(np.array([1.0]), 0.5), [0.5])


class TestCouplings(unittest.TestCase):

    def test_closed_form_at_quarter_angle(self):
        domain = DomainConfig(OMEGA, 0.3)
        value = coupling_coefficient(2, 0, 1, domain) / domain.izeta2
        self.assertAlmostEqual(coupling_closed_form(), 1.221502, places=5)
        self.assertLess(abs(value - coupling_closed_form()) / coupling_closed_form(), 1e-5)

    def test_vanishing_couplings(self):
        domain = DomainConfig(OMEGA, 1.0)
        self.assertLess(abs(coupling_coefficient(3, 0, 1, domain)), 1e-6)
        self.assertEqual(coupling_coefficient(2, 0, 1, domain, p_prime=1), 0j)
        self.assertEqual(coupling_coefficient(2, 1, 1, domain, p_prime=1), 0j)
        with self.assertRaises(DomainError):
            coupling_coefficient(1, 0, 1, domain)

    def test_check_passes(self):
        self.assertTrue(all(result.passed for result in check_coupling()))


class TestQuasiDual(unittest.TestCase):
    """Quasi-dual estimates and their corrections."""

    def test_zero_zeta_is_exact(self):
        self.assertTrue(all(result.passed for result in check_zero_zeta_exactness()))

    def test_corrections_follow_couplings(self):
        domain = DomainConfig(OMEGA, 0.2)
        family = manufactured_family(MANUFACTURED, domain)
        report = quasidual_extract(family, domain, 2, 1, [0.05], parts=(0,))
        estimate = report.estimates[0]
        self.assertTrue(estimate.corrections_applied[(2, 0)])
        self.assertFalse(estimate.corrections_applied[(1, 0)])
        coupling = coupling_coefficient(2, 0, 1, domain)
        self.assertAlmostEqual(estimate.corrected[(2, 0)],
                               estimate.raw[(2, 0)] - coupling * estimate.corrected[(0, 0)], places=12)
        self.assertLess(abs(estimate.corrected[(2, 0)] + 0.5), abs(estimate.raw[(2, 0)] + 0.5))

    def test_needs_enough_shadows(self):
        domain = DomainConfig(OMEGA, 0.2)
        family = manufactured_family(MANUFACTURED, domain)
        with self.assertRaises(ExtractionError):
            quasidual_extract(family, domain, 2, 0, [0.1])

    def test_manufactured_rates(self):
        results = check_manufactured_rates()
        self.assertTrue(results)
        for result in results:
            self.assertTrue(result.passed, msg=f'{result.name}: {result.detail}')

    def test_models(self):
        self.assertEqual(quasidual_model(2, 0, 1).dominant, ModelTerm(-2, 4, 1))
        self.assertEqual(quasidual_model(3, 1, 2).dominant, ModelTerm(-2, 6, 0))
        self.assertEqual(quasidual_model(1, 0, 0).exponent, 1)


class TestMoments(unittest.TestCase):
    """Method of moments on ``S^{0,0} + 2 S^{1,0} - 0.5 S^{2,0}``."""

    @classmethod
    def setUpClass(cls):
        cls.domain = DomainConfig(OMEGA, 0.2)
        cls.family = staticmethod(manufactured_family(MANUFACTURED, cls.domain))
        cls.radii = geometric_radii(1e-2, 1e-3, 8)

    def study(self, variant):
        return convergence_study('moments', self.family, self.domain, self.radii, MANUFACTURED, variant=variant)

    def test_one_term_rates(self):
        report = self.study(MomentVariant.N1_ONE_TERM)
        fit00 = report.slopes[(0, 0)]
        self.assertEqual(fit00.expected, 2.0)
        self.assertLessEqual(abs(fit00.slope - fit00.expected), RATE_SLACK)
        fit10 = report.slopes[(1, 0)]
        self.assertEqual(fit10.expected, 1.0)
        self.assertLessEqual(abs(fit10.slope - fit10.expected), RATE_SLACK)
        self.assertNotIn((1, 1), report.slopes)

    def test_two_terms_improve_constant_coefficient(self):
        one = self.study(MomentVariant.N1_ONE_TERM)
        two = self.study(MomentVariant.N1_TWO_TERMS)
        self.assertLess(abs(two.estimate((0, 0)) - 1.0), abs(one.estimate((0, 0)) - 1.0))
        self.assertEqual(two.estimate((1, 0)), one.estimate((1, 0)))

    def test_three_moments_remove_constant_coupling(self):
        two = self.study(MomentVariant.N1_TWO_TERMS)
        three = self.study(MomentVariant.N3)
        self.assertLess(abs(three.estimate((1, 0)) - 2.0), abs(two.estimate((1, 0)) - 2.0))
        self.assertIn(ModelTerm(-1, 4), three.models[(1, 0)].terms)
        self.assertTrue(all(est.corrections_applied[(1, 0)] for est in three.estimates))

    def test_three_moments_rate(self):
        fit = self.study(MomentVariant.N3).slopes[(1, 0)]
        self.assertEqual(fit.expected, 2.0)
        self.assertLessEqual(abs(fit.slope - fit.expected), RATE_SLACK)

    def test_constant_coupling_left_by_three_moments_grows_as_zeta_to_the_fourth(self):
        # Lambda^{1,0} = 0, so the whole estimate is leakage from Lambda^{0,0}
        errors = {}
        for zeta in (4.0, 8.0):
            domain = DomainConfig(OMEGA, zeta)
            family = manufactured_family({(0, 0): 1.0}, domain)
            for variant in (MomentVariant.N1_TWO_TERMS, MomentVariant.N3):
                report = moments_extract(family, domain, [1e-3], variant)
                errors[(variant, zeta)] = abs(report.estimate((1, 0)))
        self.assertAlmostEqual(errors[(MomentVariant.N3, 8.0)] / errors[(MomentVariant.N3, 4.0)], 16.0, delta=0.5)
        self.assertAlmostEqual(
            errors[(MomentVariant.N1_TWO_TERMS, 8.0)] / errors[(MomentVariant.N1_TWO_TERMS, 4.0)], 4.0, delta=0.1)
        self.assertLess(errors[(MomentVariant.N3, 8.0)], errors[(MomentVariant.N1_TWO_TERMS, 8.0)])

    def test_zero_zeta_moments_are_exact(self):
        domain = DomainConfig(OMEGA, 0.0)
        family = manufactured_family({(0, 0): 1.0, (1, 1): -3.0}, domain)
        report = moments_extract(family, domain, [0.5, 0.1], MomentVariant.N3)
        for est in report.estimates:
            self.assertAlmostEqual(est.corrected[(0, 0)], 1.0, places=12)
            self.assertAlmostEqual(est.corrected[(1, 0)], 0.0, places=12)
            self.assertAlmostEqual(est.corrected[(1, 1)], -3.0, places=12)

    def test_moment_coefficients(self):
        coeffs = moment_coefficients(self.domain)
        self.assertEqual(set(coeffs), {'m00', 'm10', 'm11'})
        self.assertGreater(abs(coeffs['m00'][0]), 0.0)
        self.assertAlmostEqual(coeffs['m00'][1], 0.0, places=10)

    def test_radius_above_one_rejected(self):
        with self.assertRaises(ExtractionError):
            moments_extract(self.family, self.domain, [0.5, 1.5])

    def test_models(self):
        self.assertEqual(moments_model((1, 0), MomentVariant.N1_ONE_TERM).exponent, 1)
        self.assertEqual(moments_model((0, 0), MomentVariant.N1_TWO_TERMS).exponent, 3)
        self.assertEqual(moments_model((1, 0), MomentVariant.N3).describe(), 'R0^2 + R^1 R0^2 + R^-1 R0^4')
        self.assertEqual(moments_model((1, 0), MomentVariant.N3).exponent, 2)


class TestSlopeFit(unittest.TestCase):

    def test_rate_check_is_two_sided(self):
        self.assertFalse(rate_within_slack(SlopeFit(4.0, 5.65, False, 8)))
        self.assertFalse(rate_within_slack(SlopeFit(4.0, 3.6, False, 8)))
        self.assertTrue(rate_within_slack(SlopeFit(4.0, 3.93, False, 8)))
        self.assertTrue(rate_within_slack(SlopeFit(2.0, None, True, 8)))

    def test_pure_power(self):
        model = RemainderModel((ModelTerm(2, 0),))
        radii = geometric_radii(0.1, 1e-3, 6)
        fit = fit_slope(radii, 5 * radii ** 3, model)
        self.assertFalse(fit.exact)
        self.assertAlmostEqual(fit.slope, 3.0, places=10)
        self.assertEqual(fit.expected, 2.0)

    def test_log_factors_are_divided_out(self):
        model = RemainderModel((ModelTerm(0, 2, 1),))
        radii = geometric_radii(0.1, 1e-3, 6)
        errors = model(radii, 0.7)
        self.assertAlmostEqual(fit_slope(radii, errors, model).slope, 2.0, places=10)

    def test_rounding_level_errors_are_exact(self):
        model = RemainderModel((ModelTerm(1, 2),))
        fit = fit_slope([0.1, 0.05, 0.02, 0.01], [1e-14, 0.0, 3e-13, 1e-15], model, scale=2.0)
        self.assertTrue(fit.exact)
        self.assertIsNone(fit.slope)
        self.assertEqual(fit.expected, 3.0)

    def test_too_few_points(self):
        model = RemainderModel((ModelTerm(1, 2),))
        with self.assertRaises(ExtractionError):
            fit_slope([0.1, 0.05, 0.02, 0.01], [1e-3, 1e-4, 0.0, 0.0], model)

    def test_dominant_term(self):
        model = RemainderModel((ModelTerm(1, 2), ModelTerm(0, 4), ModelTerm(0, 3, 1)))
        self.assertEqual(model.dominant, ModelTerm(0, 3, 1))
        self.assertEqual(model.describe(), 'R^1 R0^2 + R0^4 + R0^3 log R')


class TestStudies(unittest.TestCase):

    def test_reference_from_smallest_radius(self):
        domain = DomainConfig(OMEGA, 0.2)
        family = manufactured_family(MANUFACTURED, domain)
        report = convergence_study('quasidual', family, domain, geometric_radii(0.1, 0.02, 4),
                                   m=1, k_max=1, r_small=1e-3)
        self.assertEqual(set(report.slopes), {(0, 0), (1, 0)})
        self.assertEqual(len(report.csv_rows()), 8)
        self.assertAlmostEqual(report.reference[(0, 0)], 1.0, places=6)

    def test_invalid_studies(self):
        domain = DomainConfig(OMEGA, 0.2)
        family = manufactured_family(MANUFACTURED, domain)
        with self.assertRaises(ExtractionError):
            convergence_study('quasidual', family, domain, [0.1, 0.05])
        with self.assertRaises(ExtractionError):
            convergence_study('galerkin', family, domain, [0.1, 0.05], MANUFACTURED)
        with self.assertRaises(ExtractionError):
            geometric_radii(0.1, 0.2, 4)

    def test_default_radii(self):
        radii = default_radii(0.05, 5)
        self.assertEqual(len(radii), 5)
        self.assertTrue(np.all(np.diff(radii) < 0))
        self.assertLess(radii[0], 0.05)


class TestReconstruction(unittest.TestCase):

    def test_zero_zeta_partial_sum(self):
        domain = DomainConfig(OMEGA, 0.0)
        r, theta = np.array([0.2, 0.6]), np.array([0.1, -2.0])
        values = reconstruct({(0, 0): 1.0, (1, 1): 2.0, (3, 0): 5.0}, domain, 2, r, theta)
        np.testing.assert_allclose(values, 1.0 + 2 * r * np.sin(theta), atol=1e-14)

    def test_matches_series(self):
        domain = DomainConfig(OMEGA, 0.5)
        r, theta = np.array([0.3]), np.array([2.5])
        expected = SingularSeries.build(1, 0, ChainKind.PRIMAL, 1, domain)(r, theta)
        np.testing.assert_allclose(reconstruct({(1, 0): 1.0}, domain, 4, r, theta), expected, rtol=1e-13)
        with self.assertRaises(DomainError):
            reconstruct({(1, 0): 1.0}, domain, -1, r, theta)


if __name__ == '__main__':
    unittest.main()
