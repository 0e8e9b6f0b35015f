"""Tests for the marshmallow schemas of chains, run configurations and reports."""
import json
import math
import unittest

from eddycorner.config import Config
from eddycorner.extraction import MomentVariant, geometric_radii, manufactured_family, moments_extract
from eddycorner.schemas import (
    ExtractionReportSchema, dump_chain, dump_run_config, load_chain, load_coefficients, load_run_config,
)
from eddycorner.shadow_engine import ChainKind, build_chain
from eddycorner.singular_functions import MU0, DomainConfig
from eddycorner.utils.config import ConfigError


class TestChainSchema(unittest.TestCase):

    def test_dump_and_load(self):
        chain = build_chain(1, ChainKind.DUAL, 2, math.pi / 4)
        data = json.loads(json.dumps(dump_chain(chain)))
        self.assertEqual(data['kind'], 'dual')
        self.assertEqual(len(data['pairs']), 3)
        self.assertEqual(set(data['pairs'][0]['minus'][0]), {'sector', 're', 'im', 'a', 'b', 'q', 's'})
        loaded = load_chain(data)
        self.assertEqual((loaded.k, loaded.kind, loaded.J), (1, ChainKind.DUAL, 2))
        for original, copy in zip(chain.pairs, loaded.pairs):
            self.assertTrue(copy.is_close(original, 1e-15))

    def test_invalid_chain(self):
        data = dump_chain(build_chain(0, ChainKind.PRIMAL, 1, 1.0))
        data['J'] = 3
        with self.assertRaises(ConfigError):
            load_chain(data)
        data = dump_chain(build_chain(0, ChainKind.PRIMAL, 1, 1.0))
        data['pairs'][0]['minus'][0]['sector'] = 'plus'
        with self.assertRaises(ConfigError):
            load_chain(data)


class TestRunConfig(unittest.TestCase):

    def test_defaults(self):
        run = load_run_config({'command': 'shadows'})
        self.assertEqual(run.zeta, Config.ZETA)
        self.assertEqual(run.k, [0])
        self.assertEqual(run.kind, 'primal')
        self.assertAlmostEqual(run.radii_bounds[0], Config.SWEEP_R_MAX_FRACTION * Config.R_DOMAIN)

    def test_units(self):
        run = load_run_config({'command': 'solve', 'zeta': '0.1414/mm', 'r_domain': '50mm', 'r_small': '5 um'})
        self.assertAlmostEqual(run.zeta, 141.4)
        self.assertAlmostEqual(run.r_domain, 0.05)
        self.assertAlmostEqual(run.r_small, 5e-6)

    def test_physical_parameters(self):
        run = load_run_config({'command': 'eval', 'kappa': 100.0, 'sigma': 1e6})
        self.assertIsNone(run.zeta)
        self.assertAlmostEqual(run.domain().zeta, math.sqrt(100.0 * MU0 * 1e6 / 4))
        with self.assertRaises(ConfigError):
            load_run_config({'command': 'eval', 'kappa': 100.0})
        with self.assertRaises(ConfigError):
            load_run_config({'command': 'eval', 'kappa': 100.0, 'sigma': 1e6, 'zeta': 1.0})

    def test_invalid_values(self):
        for data in ({'command': 'bogus'},
                     {'command': 'eval', 'p': [2]},
                     {'command': 'eval', 'r_domain': 0.05, 'r_max': 0.1},
                     {'command': 'eval', 'r_max': 0.01, 'r_min': 0.02},
                     {'command': 'solve', 'n_r': 10},
                     {'command': 'eval', 'zeta': '3 furlongs'}):
            with self.assertRaises(ConfigError, msg=str(data)):
                load_run_config(data)

    def test_dump_is_json(self):
        run = load_run_config({'command': 'extract', 'k': [0, 1], 'method': 'moments'})
        data = json.loads(json.dumps(dump_run_config(run)))
        self.assertEqual(data['command'], 'extract')
        self.assertEqual(data['k'], [0, 1])
        self.assertEqual(data['zeta'], Config.ZETA)


class TestReportSchema(unittest.TestCase):

    def setUp(self):
        domain = DomainConfig(math.pi / 4, 0.0)
        coefficients = {(0, 0): 1.0, (1, 0): 2.0, (1, 1): -1.0}
        family = manufactured_family(coefficients, domain, m=0)
        self.report = moments_extract(family, domain, geometric_radii(0.5, 0.1, 3), MomentVariant.N1_ONE_TERM)

    def test_dump(self):
        data = json.loads(json.dumps(ExtractionReportSchema().dump(self.report)))
        self.assertEqual(data['method'], 'moments')
        self.assertEqual(data['variant'], 'N1_one_term')
        self.assertEqual(len(data['estimates']), 3)
        self.assertEqual(data['estimates'][0]['corrected'][0]['k'], 0)

    def test_coefficients_from_dump(self):
        data = ExtractionReportSchema().dump(self.report)
        coefficients = load_coefficients(data)
        self.assertEqual(set(coefficients), {(0, 0), (1, 0), (1, 1)})
        self.assertAlmostEqual(coefficients[(1, 0)], 2.0, places=10)
        with self.assertRaises(ConfigError):
            load_coefficients({'estimates': []})


if __name__ == '__main__':
    unittest.main()
