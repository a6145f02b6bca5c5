"""
Unit tests for the plot-ready output tables
"""

import unittest

import numpy as np

from src.core.engine import AnalysisConfig, run
from src.core.ingest import SyntheticSpec, generate_synthetic
from src.utils.tables import SPECTRUM_COLUMNS, accumulated_frame, noise_frame, spectrum_frame, trace_frame


class TestTables(unittest.TestCase):

    def setUp(self):
        series = generate_synthetic(SyntheticSpec(length=120, seed=2))
        self.results = run(series, AnalysisConfig(N=64, l=8), attach_spectra=True)

    def test_trace_frame(self):
        frame = trace_frame(self.results)
        self.assertEqual(len(frame), len(self.results))
        self.assertTrue(np.isnan(frame['zeta'].iloc[0]))
        self.assertTrue(np.isnan(frame['A_bar'].iloc[0]))
        self.assertEqual(frame['A'].iloc[1], self.results[1].area)

    def test_spectrum_frame(self):
        frame = spectrum_frame(self.results[0].spectrum)
        self.assertEqual(list(frame.columns), SPECTRUM_COLUMNS)
        self.assertEqual(len(frame), 101)
        self.assertTrue(np.isnan(frame['C'].iloc[0]))
        self.assertTrue(np.isnan(frame['C'].iloc[-1]))
        self.assertFalse(frame['C'].iloc[1:-1].isna().any())

    def test_accumulated_frame(self):
        frame = accumulated_frame(self.results)
        self.assertEqual(list(frame.columns), ['q'] + [f'n{r.n}' for r in self.results])
        np.testing.assert_array_equal(frame['n1'].to_numpy(), self.results[0].spectrum.c)

    def test_accumulated_frame_without_spectra(self):
        bare = run(generate_synthetic(SyntheticSpec(length=120, seed=2)), AnalysisConfig(N=64, l=8))
        self.assertEqual(list(accumulated_frame(bare).columns), ['q'])

    def test_noise_frame(self):
        noise = run(generate_synthetic(SyntheticSpec(length=112, seed=3)), AnalysisConfig(N=64, l=8))
        frame = noise_frame(self.results, noise)
        self.assertEqual(list(frame.columns), ['n', 't_prime', 'zeta', 'zeta_noise'])
        self.assertEqual(len(frame), len(self.results))
        self.assertEqual(frame['n'].tolist(), [r.n for r in self.results])
        self.assertTrue(np.isnan(frame['zeta_noise'].iloc[-1]))


if __name__ == '__main__':
    unittest.main()
