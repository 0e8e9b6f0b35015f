"""Tests for the CSV and JSON artifact writers."""
import tempfile
import unittest
from pathlib import Path

from eddycorner import __version__
from eddycorner.utils.config import ConfigError
from eddycorner.utils.io import read_csv, read_json, write_csv, write_json


class TestArtifacts(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)
        self.run_config = {'command': 'eval', 'omega': 0.785398, 'k': [0, 1]}

    def test_json_carries_version_and_run_config(self):
        path = write_json(self.dir / 'nested' / 'out.json', {'x': [1, 2]}, self.run_config)
        data, header = read_json(path)
        self.assertEqual(data, {'x': [1, 2]})
        self.assertEqual(header['eddycorner_version'], __version__)
        self.assertEqual(header['run_config'], self.run_config)

    def test_csv_round_trip(self):
        rows = [{'R': 0.1, 'k': 0, 'flag': True}, {'R': 1e-5, 'k': 2, 'flag': False}]
        path = write_csv(self.dir / 'out.csv', rows, ('R', 'k', 'flag'), self.run_config)
        lines = path.read_text(encoding='utf-8').splitlines()
        self.assertEqual(lines[0], f'# eddycorner {__version__}')
        self.assertTrue(lines[1].startswith('# run_config: '))
        self.assertEqual(lines[2], 'R,k,flag')
        self.assertEqual(lines[3], '0.1,0,1')
        loaded, run_config = read_csv(path)
        self.assertEqual(loaded, [{'R': 0.1, 'k': 0.0, 'flag': 1.0}, {'R': 1e-5, 'k': 2.0, 'flag': 0.0}])
        self.assertEqual(run_config, self.run_config)

    def test_unreadable_files(self):
        with self.assertRaises(ConfigError):
            read_json(self.dir / 'missing.json')
        with self.assertRaises(ConfigError):
            read_csv(self.dir / 'missing.csv')
        bare = self.dir / 'bare.json'
        bare.write_text('[1, 2]', encoding='utf-8')
        with self.assertRaises(ConfigError):
            read_json(bare)
        text = self.dir / 'text.csv'
        text.write_text('a,b\nx,1\n', encoding='utf-8')
        with self.assertRaises(ConfigError):
            read_csv(text)


if __name__ == '__main__':
    unittest.main()
