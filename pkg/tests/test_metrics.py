"""
Unit tests for zeta statistics
"""

import unittest

import numpy as np

from src.core.engine import WindowResult
from src.utils.metrics import prior_median, summarize_zeta, zeta_values


class TestMetrics(unittest.TestCase):

    def test_summary(self):
        summary = summarize_zeta(np.arange(1.0, 101.0))
        self.assertEqual(summary['count'], 100)
        self.assertEqual(summary['max'], 100.0)
        self.assertEqual(summary['mean'], 50.5)
        self.assertEqual(summary['median'], 50.5)
        self.assertAlmostEqual(summary['p99'], 99.01, places=9)

    def test_empty_summary(self):
        summary = summarize_zeta([])
        self.assertEqual(summary['count'], 0)
        self.assertIsNone(summary['p95'])

    def test_prior_median(self):
        results = [
            WindowResult(n=n, t_prime=n, label=None, area=1.0, running_mean=1.0, zeta=None if n == 1 else float(n))
            for n in range(1, 80)
        ]
        np.testing.assert_array_equal(zeta_values(results[:4]), [2.0, 3.0, 4.0])
        self.assertEqual(prior_median(results, 5), 3.0)
        self.assertEqual(prior_median(results, 70, span=10), 64.5)
        self.assertIsNone(prior_median(results, 2))


if __name__ == '__main__':
    unittest.main()
