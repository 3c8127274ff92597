"""
Benchmark - Test Cases
Timing table and scaling report, using a fake experiment so nothing heavy runs.
"""
import shutil
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from montecarlo import artifacts as io
from montecarlo.benchmark import TIMING_FIELDS, BenchmarkCase, scaling_report, time_call, time_case
from montecarlo.exceptions import ArtifactIOError


class CountingCase(BenchmarkCase):
    name = 'counting'

    def __init__(self):
        super().__init__({'seed': 0, 'precision': 'double', 'generator': 'mrg32k3a', 'block_length': 1024})
        self.calls = []

    def sizes(self):
        return [8, 16]

    def run(self, size, workers):
        self.calls.append((size, workers))


def row(size, workers, seconds, speedup=1.0):
    return {'experiment': 'popmcmc', 'size': size, 'workers': workers, 'repetitions': 3,
            'median_seconds': seconds, 'speedup': speedup}


class TimingTestCase(SimpleTestCase):
    """Test cases for timing cells"""

    def test_time_call_runs_each_repetition(self):
        calls = []
        seconds = time_call(lambda: calls.append(1), 5)
        self.assertEqual(len(calls), 5)
        self.assertGreaterEqual(seconds, 0.0)

    def test_baseline_runs_first(self):
        """Test that the fewest-workers cell is timed before the others at every size"""
        case = CountingCase()
        rows = time_case(case, [4, 1, 2], 3)
        self.assertEqual(case.calls[0], (8, 1))
        self.assertEqual(case.calls[9], (16, 1))
        self.assertEqual([(r['size'], r['workers']) for r in rows],
                         [(8, 1), (8, 2), (8, 4), (16, 1), (16, 2), (16, 4)])
        self.assertTrue(all(r['repetitions'] == 3 for r in rows))


class ScalingReportTestCase(SimpleTestCase):
    """Test cases for the scaling checks"""

    def test_linear_cost_curve(self):
        rows = [row(256, 1, 1.0), row(512, 1, 2.0), row(1024, 1, 4.1),
                row(256, 4, 0.4), row(512, 4, 0.7), row(1024, 4, 1.5, speedup=4.1 / 1.5)]
        report = scaling_report(rows, cores=8)['popmcmc']
        self.assertEqual([r['time_ratio'] for r in report['ratios']], [2.0, 2.05])
        self.assertTrue(report['doubling_within_bounds'])
        self.assertEqual(report['largest_size'], 1024)
        self.assertTrue(report['speedup_checked'])
        self.assertTrue(report['speedup_ok'])

    def test_superlinear_cost_fails(self):
        rows = [row(256, 1, 1.0), row(512, 1, 3.0), row(256, 2, 0.6), row(512, 2, 1.8, speedup=1.6)]
        report = scaling_report(rows, cores=2)['popmcmc']
        self.assertFalse(report['doubling_within_bounds'])
        self.assertFalse(report['speedup_checked'])
        self.assertIsNone(report['speedup_ok'])


class TimingTableTestCase(SimpleTestCase):
    """Test cases for reading the timing table back"""

    def setUp(self):
        self.tmp = Path(tempfile.mkdtemp(prefix='popmc-timings-'))
        self.addCleanup(shutil.rmtree, self.tmp, ignore_errors=True)

    def test_written_rows_read_back_by_column(self):
        """Test that quoted cells containing commas keep their columns"""
        rows = [row(256, 1, 1.5), {**row(512, 2, 0.75, speedup=2.0), 'experiment': 'smc-sampler, tempered'}]
        path = io.write_records(self.tmp / 'timings.csv', rows, TIMING_FIELDS)
        timings = io.read_records(path)
        self.assertEqual([t['experiment'] for t in timings], ['popmcmc', 'smc-sampler, tempered'])
        self.assertEqual(int(timings[1]['size']), 512)
        self.assertEqual(float(timings[1]['speedup']), 2.0)
        self.assertEqual(list(timings[0]), list(TIMING_FIELDS))

    def test_missing_table_is_an_artifact_error(self):
        with self.assertRaises(ArtifactIOError):
            io.read_records(self.tmp / 'absent.csv')
