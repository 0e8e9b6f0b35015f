"""
Tests for the command-line front end.

Commands run in the testing configuration and write into a temporary
directory; exit codes are 0 on success, 1 for usage errors and 2 for
failed checks.
"""
import math
import tempfile
import unittest
from pathlib import Path
from unittest import mock

from click.testing import CliRunner

from eddycorner import __version__
from eddycorner.cli import cli
from eddycorner.error_handlers import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE
from eddycorner.utils.io import read_csv, read_json
from eddycorner.verification import CheckResult

SWEEP = ['--zeta', '0.2', '--r-domain', '1', '--r-max', '0.1', '--r-min', '0.01']


class CliTestCase(unittest.TestCase):

    def setUp(self):
        self.runner = CliRunner()
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.out = Path(self.tmp.name)

    def invoke(self, *args):
        return self.runner.invoke(cli, ['--config-name', 'testing', *args])


class TestGroup(CliTestCase):

    def test_version(self):
        result = self.runner.invoke(cli, ['--version'])
        self.assertEqual(result.exit_code, EXIT_OK)
        self.assertIn(__version__, result.output)

    def test_unknown_configuration(self):
        result = self.runner.invoke(cli, ['--config-name', 'nope', 'shadows'])
        self.assertEqual(result.exit_code, EXIT_USAGE)

    def test_bad_options(self):
        self.assertEqual(self.invoke('shadows', '--kind', 'sideways').exit_code, EXIT_USAGE)
        self.assertEqual(self.runner.invoke(cli, ['--bogus']).exit_code, EXIT_USAGE)
        self.assertEqual(self.invoke('eval', '--omega', '7', '-o', str(self.out)).exit_code, EXIT_USAGE)

    def test_config_file(self):
        path = self.out / 'run.yaml'
        path.write_text('zeta: 0.5\nJ: 1\n', encoding='utf-8')
        result = self.runner.invoke(cli, ['--config-name', 'testing', '--config-file', str(path),
                                          'shadows', '--k', '0', '-o', str(self.out)])
        self.assertEqual(result.exit_code, EXIT_OK, msg=result.output)
        data, header = read_json(self.out / 'chain_primal_k0_J1.json')
        self.assertEqual(header['run_config']['zeta'], 0.5)
        self.assertEqual(data['J'], 1)


class TestShadows(CliTestCase):

    def test_verify(self):
        result = self.invoke('shadows', '--k', '1', '--k', '2', '--p', '0', '--p', '1', '--J', '2',
                             '--verify', '-o', str(self.out))
        self.assertEqual(result.exit_code, EXIT_OK, msg=result.output)
        self.assertIn('verification passed', result.output)
        self.assertIn('# primal k=1 p=0', result.output)
        for k in (1, 2):
            self.assertTrue((self.out / f'chain_primal_k{k}_J2.json').is_file())

    def test_dual_chain(self):
        result = self.invoke('shadows', '--k', '0', '--kind', 'dual', '--J', '1', '-o', str(self.out))
        self.assertEqual(result.exit_code, EXIT_OK, msg=result.output)
        data, _ = read_json(self.out / 'chain_dual_k0_J1.json')
        self.assertEqual(data['kind'], 'dual')


class TestEvaluate(CliTestCase):

    def test_grid_rows(self):
        result = self.invoke('eval', '--k', '1', '--p', '0', '--p', '1', '--m', '1', '--zeta', '0.5',
                             '--r-max', '0.02', '--r-min', '0.001', '--r-points', '4', '--n-theta', '16',
                             '-o', str(self.out))
        self.assertEqual(result.exit_code, EXIT_OK, msg=result.output)
        for p in (0, 1):
            rows, run_config = read_csv(self.out / f'eval_primal_k1_p{p}_m1.csv')
            self.assertEqual(len(rows), 4 * 16)
            self.assertEqual(run_config['command'], 'eval')
            self.assertEqual(run_config['n_theta'], 16)
        rows, _ = read_csv(self.out / 'eval_primal_k1_p0_m1.csv')
        self.assertAlmostEqual(rows[0]['r'], 0.02)
        self.assertAlmostEqual(rows[0]['theta'], -math.pi)


class TestExtract(CliTestCase):

    def test_moments_sweep(self):
        result = self.invoke('extract', '--mode', 'manufactured', '--method', 'moments',
                             '--variant', 'N1_one_term', '--r-points', '8', *SWEEP, '-o', str(self.out))
        self.assertEqual(result.exit_code, EXIT_OK, msg=result.output)
        self.assertIn('Lambda^{0,0}', result.output)
        rows, _ = read_csv(self.out / 'extract_moments.csv')
        self.assertEqual(len(rows), 2 * 8)
        data, _ = read_json(self.out / 'extract_moments.json')
        self.assertEqual(data['variant'], 'N1_one_term')

    def test_quasidual_then_reconstruct(self):
        result = self.invoke('extract', '--mode', 'manufactured', '--k', '1', '--m', '1',
                             '--coefficient', '0', '0', '1', '--coefficient', '1', '0', '2+0.5j',
                             '--r-points', '6', *SWEEP, '-o', str(self.out))
        self.assertEqual(result.exit_code, EXIT_OK, msg=result.output)
        data, _ = read_json(self.out / 'extract_quasidual.json')
        self.assertEqual({(s['k'], s['p']) for s in data['slopes']}, {(0, 0), (1, 0)})

        result = self.invoke('reconstruct', '--order', '2',
                             '--coefficients-file', str(self.out / 'extract_quasidual.json'),
                             '--r-points', '4', *SWEEP, '-o', str(self.out))
        self.assertEqual(result.exit_code, EXIT_OK, msg=result.output)
        rows, _ = read_csv(self.out / 'reconstruct_order2.csv')
        self.assertEqual(len(rows), 4 * 64)
        first = rows[0]
        expected = 1 + (2 + 0.5j) * first['r'] * math.cos(first['theta'])
        self.assertAlmostEqual(first['re'], expected.real, delta=5e-3)
        self.assertAlmostEqual(first['im'], expected.imag, delta=5e-3)

    def test_bad_coefficient(self):
        result = self.invoke('extract', '--mode', 'manufactured', '--coefficient', '0', '0', 'one',
                             *SWEEP, '-o', str(self.out))
        self.assertEqual(result.exit_code, EXIT_USAGE)


class TestSolve(CliTestCase):

    def test_disk_problem(self):
        result = self.invoke('solve', '--zeta', '20', '-o', str(self.out))
        self.assertEqual(result.exit_code, EXIT_OK, msg=result.output)
        self.assertIn('A(c) =', result.output)
        rows, run_config = read_csv(self.out / 'field.csv')
        self.assertEqual(len(rows), 1 + 64 * 64)
        self.assertEqual(run_config['n_r'], 64)


class TestVerifyAll(CliTestCase):

    def test_failed_check_exits_with_two(self):
        failing = [CheckResult('golden', True, 'ok'), CheckResult('coupling', False, 'off by 1')]
        with mock.patch('eddycorner.cli.run_all', return_value=failing):
            result = self.invoke('verify-all')
        self.assertEqual(result.exit_code, EXIT_NUMERICAL)
        self.assertIn('FAIL  coupling: off by 1', result.output)

    def test_passing_checks(self):
        with mock.patch('eddycorner.cli.run_all', return_value=[CheckResult('golden', True, 'ok')]) as run_all:
            result = self.invoke('verify-all')
        self.assertEqual(result.exit_code, EXIT_OK, msg=result.output)
        self.assertIn('all 1 checks passed', result.output)
        run_all.assert_called_once_with()


if __name__ == '__main__':
    unittest.main()
