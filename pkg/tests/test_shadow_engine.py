"""
Tests for the shadow recursion.

The recursive engine is compared with the closed-form first shadows and
every built chain is run through the invariant checks of
:func:`~eddycorner.shadow_engine.verify_chain`.
"""
import math
import unittest

from eddycorner.exceptions import DomainError
from eddycorner.shadow_engine import (
    ChainKind, ElementaryProblem, SectorPair, build_chain, check_shadow, degree_bound, elementary_step,
    first_shadow_of_log, first_shadow_of_power, jump_magnitude, kernel_pairs, pin_representative, seed_pair,
    template_coefficients, verify_chain,
)
from eddycorner.term_algebra import Sector, TermSum, mixed_derivative

OMEGAS = (math.pi / 4, 2 * math.pi / 3, 1.0)


class TestSeeds(unittest.TestCase):
    """Leading terms of the chains."""

    def test_primal_seed(self):
        pair = seed_pair(3, ChainKind.PRIMAL)
        self.assertEqual(pair.homogeneity, 3)
        self.assertEqual(pair.minus.coefficient(3, 0), 1.0)
        self.assertEqual(pair.plus.coefficient(3, 0), -1.0)

    def test_dual_seeds(self):
        pair = seed_pair(2, ChainKind.DUAL)
        self.assertEqual(pair.homogeneity, -2)
        self.assertAlmostEqual(pair.minus.coefficient(-2, 0), 1 / (4 * math.pi))
        self.assertAlmostEqual(pair.plus.coefficient(-2, 0), 1 / (4 * math.pi))
        log_seed = seed_pair(0, ChainKind.DUAL)
        self.assertEqual(log_seed.homogeneity, 0)
        self.assertAlmostEqual(log_seed.minus.coefficient(0, 0, 1, 0), -1 / (2 * math.pi))

    def test_negative_k_rejected(self):
        with self.assertRaises(DomainError):
            seed_pair(-1, ChainKind.PRIMAL)

    def test_pair_checks_homogeneity_and_sectors(self):
        with self.assertRaises(DomainError):
            SectorPair(TermSum.monomial(Sector.MINUS, 1.0, 2, 0), TermSum.zero(Sector.PLUS), 3)
        with self.assertRaises(DomainError):
            SectorPair(TermSum.zero(Sector.PLUS), TermSum.zero(Sector.PLUS), 0)


class TestKernel(unittest.TestCase):
    """Homogeneous pairs without source or jumps, and the pinning rule."""

    def test_kernel_pairs_are_free(self):
        for lam in (-3, -1, 0, 2, 5):
            for pair in kernel_pairs(lam):
                self.assertLess(jump_magnitude(pair, math.pi / 4), 1e-13)
                self.assertFalse(mixed_derivative(pair.minus))
                self.assertFalse(mixed_derivative(pair.plus))

    def test_pinning_removes_kernel_components(self):
        chain = build_chain(1, ChainKind.PRIMAL, 1, math.pi / 4)
        pair = chain.pairs[1]
        first, second = kernel_pairs(pair.homogeneity)
        disturbed = pair + first.scale(0.3 - 0.2j) + second.scale(1.7)
        self.assertTrue(pin_representative(disturbed).is_close(pair, 1e-13))
        self.assertTrue(pin_representative(pair).is_close(pair, 1e-14))

    def test_pinning_at_homogeneity_zero(self):
        chain = build_chain(2, ChainKind.DUAL, 1, math.pi / 4)
        pair = chain.pairs[1]
        self.assertEqual(pair.homogeneity, 0)
        first, second = kernel_pairs(0)
        disturbed = pair + first.scale(2.0) + second.scale(-0.5)
        self.assertTrue(pin_representative(disturbed).is_close(pair, 1e-13))


class TestElementaryStep(unittest.TestCase):
    """One level of the shadow recursion on single interior monomials."""

    def step(self, lam, alpha, ell, n, omega):
        return elementary_step(ElementaryProblem(lam, ((alpha, ell, n),)), omega)

    def test_regular_monomial(self):
        for omega in (math.pi / 4, 2 * math.pi / 3):
            s, c = math.sin(omega), math.cos(omega)
            step = self.step(3, 1.0, 0, 0, omega)
            self.assertEqual(step.branch, 'regular')
            self.assertTrue(step.residual.is_empty)
            minus, plus = step.particular.minus, step.particular.plus
            self.assertAlmostEqual(minus.coefficient(3, 0, 1, 0), s / (3 * math.pi), places=12)
            self.assertAlmostEqual(minus.coefficient(0, 3, 0, 1), math.sin(2 * omega) / (6 * math.pi), places=12)
            self.assertAlmostEqual(plus.coefficient(3, 0, 1, 0), -s / (3 * math.pi), places=12)
            self.assertAlmostEqual(step.coefficients[(0, 'A')], s / (3 * math.pi), places=12)
            pinned = pin_representative(step.particular)
            self.assertAlmostEqual(pinned.minus.coefficient(3, 0), -c / 3, places=12)
            self.assertAlmostEqual(pinned.plus.coefficient(0, 3), -math.cos(2 * omega) / 6, places=12)
            closed = first_shadow_of_power(1, omega)
            self.assertTrue(pinned.is_close(closed, 1e-9 * closed.magnitude), msg=f'omega={omega}')
            source = TermSum.monomial(Sector.MINUS, 1.0, 1, 0)
            self.assertLess(max(check_shadow(step.particular, source, omega).values()), 1e-11)

    def test_homogeneity_zero(self):
        for omega in (math.pi / 4, 2 * math.pi / 3):
            step = self.step(0, 1.0, 0, 0, omega)
            self.assertEqual(step.branch, 'logarithmic_exact')
            self.assertTrue(step.residual.is_empty)
            pinned = pin_representative(step.particular)
            self.assertAlmostEqual(pinned.plus.coefficient(0, 0, 0, 1), -math.cos(omega), places=10)
            closed = first_shadow_of_power(-2, omega)
            self.assertTrue(pinned.is_close(closed, 1e-9 * closed.magnitude), msg=f'omega={omega}')

    def test_zero_source(self):
        step = self.step(3, 0.0, 0, 0, math.pi / 4)
        self.assertEqual(step.branch, 'regular')
        self.assertEqual(step.particular.magnitude, 0.0)
        self.assertEqual(step.coefficients, {})
        self.assertTrue(step.residual.is_empty)
        empty = elementary_step(ElementaryProblem(3), math.pi / 4)
        self.assertEqual(empty.branch, 'empty')
        self.assertEqual(empty.particular.magnitude, 0.0)

    def test_resonant_monomial(self):
        # z^-1 zbar needs a log z in its primitive
        for omega in (math.pi / 4, 2 * math.pi / 3):
            step = self.step(2, 1.0, 1, 0, omega)
            self.assertEqual(step.branch, 'resonant')
            self.assertTrue(step.residual.is_empty)
            self.assertAlmostEqual(step.particular.minus.coefficient(0, 2, 1, 0), 0.5, places=12)
            source = TermSum.monomial(Sector.MINUS, 1.0, -1, 1)
            self.assertLess(max(check_shadow(step.particular, source, omega).values()), 1e-11)

    def test_lower_levels_pass_to_residual(self):
        step = self.step(2, 1.0, 0, 1, math.pi / 4)
        self.assertEqual(step.branch, 'regular')
        self.assertFalse(step.residual.is_empty)
        self.assertEqual(step.residual.top_level, 0)
        entry = next(e for e in step.residual.interior if (e.ell, e.n) == (0, 0))
        self.assertAlmostEqual(entry.alpha, -1.0, places=12)


class TestChains(unittest.TestCase):
    """Built chains against their invariants and the closed forms."""

    def test_primal_chains_satisfy_invariants(self):
        for omega in OMEGAS:
            for k in range(4):
                chain = build_chain(k, ChainKind.PRIMAL, 3, omega)
                self.assertEqual([p.homogeneity for p in chain.pairs], [k, k + 2, k + 4, k + 6])
                self.assertEqual(verify_chain(chain), [], msg=f'k={k} omega={omega}')

    def test_dual_chains_satisfy_invariants(self):
        for omega in OMEGAS:
            for k in range(4):
                chain = build_chain(k, ChainKind.DUAL, 3, omega)
                self.assertEqual(chain.pairs[0].homogeneity, -k)
                self.assertEqual(verify_chain(chain), [], msg=f'k={k} omega={omega}')

    def test_shadow_equations(self):
        chain = build_chain(0, ChainKind.PRIMAL, 2, 2 * math.pi / 3)
        for j in (1, 2):
            residuals = check_shadow(chain.pairs[j], chain.pairs[j - 1].minus, chain.omega)
            self.assertLess(max(residuals.values()), 1e-11)

    def test_primal_first_shadow_matches_closed_form(self):
        for omega in OMEGAS:
            for k in range(4):
                engine = build_chain(k, ChainKind.PRIMAL, 1, omega).pairs[1]
                closed = first_shadow_of_power(k, omega)
                self.assertTrue(engine.is_close(closed, 1e-9 * closed.magnitude), msg=f'k={k} omega={omega}')

    def test_dual_first_shadow_matches_closed_form(self):
        for omega in OMEGAS:
            engine = build_chain(0, ChainKind.DUAL, 1, omega).pairs[1]
            closed = first_shadow_of_log(omega)
            self.assertTrue(engine.is_close(closed, 1e-9 * closed.magnitude))
            for k in (1, 2, 3):
                engine = build_chain(k, ChainKind.DUAL, 1, omega).pairs[1]
                closed = first_shadow_of_power(-k, omega).scale(1 / (2 * k * math.pi))
                self.assertTrue(engine.is_close(closed, 1e-9 * closed.magnitude), msg=f'k={k} omega={omega}')

    def test_top_log_coefficient_of_first_shadow(self):
        omega = math.pi / 4
        for k in range(3):
            top = template_coefficients(build_chain(k, ChainKind.PRIMAL, 1, omega), 1)
            self.assertAlmostEqual(top['a'], math.sin(omega) / (math.pi * (k + 2)), places=12)
            self.assertAlmostEqual(top['a_plus'], (-1) ** k * top['a'], places=12)

    def test_degree_bounds(self):
        self.assertEqual([degree_bound(2, ChainKind.PRIMAL, j) for j in range(4)], [0, 1, 2, 3])
        self.assertEqual([degree_bound(0, ChainKind.DUAL, j) for j in range(3)], [1, 1, 3])
        self.assertEqual(degree_bound(4, ChainKind.DUAL, 2), 3)
        self.assertEqual(degree_bound(4, ChainKind.DUAL, 1), 1)
        self.assertEqual(build_chain(0, ChainKind.DUAL, 0, 1.0).pairs[0].log_degree, 1)

    def test_chains_are_memoized(self):
        self.assertIs(build_chain(2, ChainKind.PRIMAL, 2, 1.0), build_chain(2, ChainKind.PRIMAL, 2, 1.0))

    def test_invalid_arguments(self):
        with self.assertRaises(DomainError):
            build_chain(-1, ChainKind.DUAL, 1, 1.0)
        with self.assertRaises(DomainError):
            build_chain(1, ChainKind.PRIMAL, -1, 1.0)
        for omega in (0.0, 2 * math.pi, -1.0):
            with self.assertRaises(DomainError):
                build_chain(1, ChainKind.PRIMAL, 1, omega)


if __name__ == '__main__':
    unittest.main()
