"""
Unit tests for jump, lobe and crisis detection
"""

import os
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from src.core.detect import (
    Classification,
    DetectionPolicy,
    NoiseReference,
    classify,
    detect_jumps,
    find_lobes,
    noise_reference,
    robustness_sweep,
)
from src.core.engine import AnalysisConfig, WindowResult, run
from src.core.errors import ConfigError, SweepError
from src.core.ingest import SyntheticKind, SyntheticSpec, as_series, generate_synthetic, parse_series
from src.core.mfcore import QGrid
from src.utils.metrics import prior_median, zeta_values

CRASH_INDEX = 1800
CRASH_LENGTH = 1900
# t'_1 = 749 + 1000 + 1 leaves fifty windows before the crash
CRASH_CONFIG = AnalysisConfig(N=1000, T=1, l=1, t0=749)


def trace(zetas, start=1):
    return [
        WindowResult(n=n, t_prime=100 + n, label=None, area=1.0, running_mean=1.0, zeta=z)
        for n, z in enumerate(zetas, start=start)
    ]


def crash_series(seed=0):
    return generate_synthetic(SyntheticSpec(
        kind=SyntheticKind.WHITE_NOISE_WITH_CRASH,
        length=CRASH_LENGTH,
        seed=seed,
        crash_index=CRASH_INDEX,
        crash_magnitude=-20.0,
    ))


class TestDetectionPolicy(unittest.TestCase):

    def test_defaults(self):
        policy = DetectionPolicy()
        self.assertAlmostEqual(policy.threshold, 0.01, places=15)
        self.assertEqual(policy.sweep_N, (500, 1000, 1500))
        self.assertEqual(policy.sweep_T, (1, 2, 5))
        self.assertEqual(policy.sweep_l, (1, 5))

    def test_invalid(self):
        for kwargs in (
            {'noise_floor': 0.0},
            {'jump_factor': -1.0},
            {'lobe_prominence': 0.0},
            {'sweep_persistence': 0.0},
            {'sweep_persistence': 1.2},
            {'sweep_N': ()},
            {'sweep_l': (0, 1)},
        ):
            with self.subTest(**kwargs):
                with self.assertRaises(ConfigError):
                    DetectionPolicy(**kwargs)

    def test_measured_noise_floor(self):
        spec = SyntheticSpec(length=10)
        measured = NoiseReference(spec=spec, summary={'max': 0.004})
        self.assertEqual(DetectionPolicy().with_measured_noise_floor(measured).noise_floor, 0.004)

        degenerate = NoiseReference(spec=spec, summary={'max': None}, degenerate=True)
        self.assertEqual(DetectionPolicy().with_measured_noise_floor(degenerate).noise_floor, 1e-3)


class TestDetectJumps(unittest.TestCase):

    def setUp(self):
        self.policy = DetectionPolicy()

    def test_quiet_trace(self):
        self.assertEqual(detect_jumps(trace([1e-3, 5e-4, 8e-4, 1e-3]), self.policy), [])

    def test_single_window(self):
        zetas = [5e-4] * 10
        zetas[6] = 0.05
        candidates = detect_jumps(trace(zetas), self.policy)
        self.assertEqual(len(candidates), 1)
        self.assertEqual(candidates[0].n_first, 7)
        self.assertEqual(candidates[0].t_prime, 107)
        self.assertEqual(candidates[0].zeta, 0.05)

    def test_consecutive_windows_merge(self):
        candidates = detect_jumps(trace([5e-4, 0.02, 0.08, 0.03, 5e-4, 0.04]), self.policy)
        self.assertEqual([(c.n_first, c.n_last) for c in candidates], [(2, 4), (6, 6)])
        self.assertEqual(candidates[0].zeta, 0.02)
        self.assertEqual(candidates[0].peak_zeta, 0.08)

    def test_undefined_zeta_breaks_run(self):
        candidates = detect_jumps(trace([None, 0.05, None, 0.05]), self.policy)
        self.assertEqual(len(candidates), 2)

    @settings(max_examples=100, deadline=None)
    @given(
        zetas=st.lists(st.floats(0.0, 0.2), min_size=1, max_size=60),
        low=st.floats(1.0, 50.0),
        raise_by=st.floats(0.0, 100.0),
    )
    def test_raising_threshold_adds_no_events(self, zetas, low, raise_by):
        results = trace(zetas)
        loose = detect_jumps(results, DetectionPolicy(jump_factor=low))
        strict = detect_jumps(results, DetectionPolicy(jump_factor=low + raise_by))
        flagged = sum(c.n_last - c.n_first + 1 for c in strict)
        self.assertLessEqual(flagged, sum(c.n_last - c.n_first + 1 for c in loose))
        for candidate in strict:
            self.assertTrue(any(
                c.n_first <= candidate.n_first and candidate.n_last <= c.n_last for c in loose
            ))


class TestFindLobes(unittest.TestCase):

    def setUp(self):
        self.policy = DetectionPolicy()
        self.q = QGrid().interior

    def test_flat_zero(self):
        lobes = find_lobes(np.zeros(self.q.size), self.policy, q=self.q)
        self.assertEqual(lobes.positions, ())
        self.assertFalse(lobes.has_second_lobe)

    def test_single_lobe(self):
        c = np.exp(-(self.q + 1.0) ** 2)
        lobes = find_lobes(c, self.policy, q=self.q)
        self.assertEqual(len(lobes.positions), 1)
        self.assertAlmostEqual(lobes.positions[0], -1.0, places=9)
        self.assertFalse(lobes.has_second_lobe)

    def test_second_lobe_at_positive_q(self):
        c = np.exp(-(self.q + 1.0) ** 2) + 0.3 * np.exp(-4 * (self.q - 2.5) ** 2)
        lobes = find_lobes(c, self.policy, q=self.q)
        self.assertEqual(len(lobes.positions), 2)
        self.assertAlmostEqual(lobes.positions[1], 2.5, places=9)
        self.assertTrue(lobes.has_second_lobe)

    def test_two_negative_lobes(self):
        c = np.exp(-4 * (self.q + 3.0) ** 2) + np.exp(-4 * (self.q + 0.5) ** 2)
        lobes = find_lobes(c, self.policy, q=self.q)
        self.assertEqual(len(lobes.positions), 2)
        self.assertFalse(lobes.has_second_lobe)

    def test_weak_bump_ignored(self):
        c = np.exp(-(self.q + 1.0) ** 2) + 0.01 * np.exp(-4 * (self.q - 3.0) ** 2)
        lobes = find_lobes(c, self.policy, q=self.q)
        self.assertEqual(len(lobes.positions), 1)

    def test_relative_prominence(self):
        c = np.exp(-(self.q + 1.0) ** 2) + 0.3 * np.exp(-4 * (self.q - 2.5) ** 2)
        for scale in (1e-6, 0.5, 3.0, 1e4):
            self.assertEqual(
                find_lobes(scale * c, self.policy, q=self.q).positions,
                find_lobes(c, self.policy, q=self.q).positions,
            )

    def test_raw_array_needs_q(self):
        with self.assertRaises(ConfigError):
            find_lobes(np.ones(5), self.policy)


class TestClassify(unittest.TestCase):

    def test_truth_table(self):
        policy = DetectionPolicy()
        self.assertIs(classify(0.05, True, 0.9, policy), Classification.SYSTEMIC_CRISIS)
        self.assertIs(classify(0.05, True, 0.5, policy), Classification.SCARE)
        self.assertIs(classify(0.05, False, 0.9, policy), Classification.SCARE)
        self.assertIs(classify(0.05, False, 0.1, policy), Classification.SCARE)
        self.assertIs(classify(0.02, False, 0.0, policy), Classification.SCARE)
        self.assertIs(classify(0.0099, True, 1.0, policy), Classification.QUIET)
        self.assertIs(classify(0.005, True, 1.0, policy), Classification.QUIET)
        self.assertIs(classify(None, True, 1.0, policy), Classification.QUIET)


class TestNoiseReference(unittest.TestCase):

    def test_zero_variance_is_degenerate(self):
        reference = noise_reference(as_series(np.full(200, 7.0)), AnalysisConfig(N=64))
        self.assertTrue(reference.degenerate)
        self.assertEqual(reference.summary['count'], 0)
        self.assertIsNone(reference.summary['max'])

    def test_default_seed_white_noise_self_consistent(self):
        config = AnalysisConfig(N=256)
        series = generate_synthetic(SyntheticSpec(length=600, seed=0))
        own = zeta_values(run(series, config))
        reference = noise_reference(series, config)
        self.assertFalse(reference.degenerate)
        self.assertEqual(reference.spec.length, 600)
        self.assertAlmostEqual(reference.spec.mean, float(np.mean(series.values)), places=12)
        for key, statistic in (('max', np.max), ('mean', np.mean), ('p99', lambda z: np.percentile(z, 99))):
            ratio = reference.summary[key] / statistic(own)
            self.assertTrue(0.5 <= ratio <= 2.0, f"{key}: ratio {ratio}")


class TestRobustnessSweep(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.policy = DetectionPolicy()
        cls.series = crash_series()
        cls.report = robustness_sweep(cls.series, CRASH_CONFIG, cls.policy, reference_index=CRASH_INDEX)

    def test_single_systemic_crisis(self):
        crises = self.report.crises
        self.assertEqual(len(crises), 1)
        crisis = crises[0]
        self.assertLessEqual(abs(crisis.t_prime - (CRASH_INDEX + 1)), 5)
        self.assertGreaterEqual(crisis.persistence, 0.8)
        self.assertTrue(crisis.has_second_lobe)
        self.assertTrue(any(q > 0 for q in crisis.lobe_positions))
        self.assertGreaterEqual(len(crisis.lobe_positions), 2)
        self.assertEqual(crisis.lead_time, CRASH_INDEX - crisis.t_prime)
        self.assertEqual(self.report.status, Classification.SYSTEMIC_CRISIS.value)

    def test_jump_above_prior_median(self):
        crisis = self.report.crises[0]
        baseline = prior_median(self.report.base_results, crisis.n)
        self.assertGreaterEqual(crisis.zeta, 10 * baseline)

    def test_every_configuration_run(self):
        self.assertEqual(len(self.report.members), 18)
        self.assertEqual(self.report.skipped, [])
        for (N, T, l), member in self.report.members.items():
            self.assertEqual(member.results[0].t_prime, CRASH_CONFIG.t0 + CRASH_CONFIG.N + 1)

    def test_persistence_bounds(self):
        for event in self.report.events:
            self.assertTrue(0 < event.persistence <= 1)

    def test_affine_invariant_classification(self):
        moved = robustness_sweep(self.series.transformed(3.0, 100.0), CRASH_CONFIG, self.policy)
        self.assertEqual(
            [(e.t_prime, e.classification) for e in moved.events],
            [(e.t_prime, e.classification) for e in self.report.events],
        )

    def test_missing_lobe_makes_scare(self):
        strict = DetectionPolicy(lobe_prominence=0.95)
        report = robustness_sweep(self.series, CRASH_CONFIG, strict)
        self.assertEqual(report.crises, [])
        self.assertEqual(report.status, Classification.SCARE.value)

    def test_short_window_spike_is_scare(self):
        """
        A +5 spike at index 1530 after an earlier +20 spike at index 800

        The large spike sits inside every N=1000 and N=1500 window and
        outweighs the small one at q>0, so only the N=500 members, whose
        windows start after index 996, see the small spike.
        """
        values = generate_synthetic(SyntheticSpec(length=1600, variance=0.25)).values.copy()
        values[800] += 20.0
        values[1530] += 5.0
        config = AnalysisConfig(N=500, t0=1000)
        report = robustness_sweep(as_series(values), config, self.policy)
        self.assertEqual(len(report.members), 18)

        event = min(report.events, key=lambda e: abs(e.t_prime - 1531))
        self.assertLessEqual(abs(event.t_prime - 1531), 5)
        self.assertEqual({N for N, _, _ in event.members}, {500})
        self.assertLess(event.persistence, 0.8)
        self.assertGreaterEqual(event.zeta, self.policy.threshold)
        self.assertIs(event.classification, Classification.SCARE)

    def test_white_noise_stays_quiet(self):
        noise = generate_synthetic(SyntheticSpec(length=1100))
        report = robustness_sweep(noise, AnalysisConfig(), self.policy)
        self.assertEqual(report.status, Classification.QUIET.value)
        for event in report.events:
            self.assertIs(event.classification, Classification.QUIET)

    def test_concurrent_members_match(self):
        policy = DetectionPolicy(sweep_N=(64, 128), sweep_T=(1, 2), sweep_l=(1, 4))
        series = crash_series(seed=4)
        config = AnalysisConfig(N=128, t0=1400)
        serial = robustness_sweep(series, config, policy)
        threaded = robustness_sweep(series, config, policy, workers=4)
        self.assertEqual([e.to_record() for e in serial.events], [e.to_record() for e in threaded.events])

    def test_oversized_configuration_skipped(self):
        policy = DetectionPolicy(sweep_N=(64, 5000), sweep_T=(1,), sweep_l=(1,))
        with self.assertLogs("src.core.detect", level="WARNING"):
            report = robustness_sweep(crash_series(), AnalysisConfig(N=64, t0=1400), policy)
        self.assertEqual(list(report.members), [(64, 1, 1)])
        self.assertEqual([key for key, _ in report.skipped], [(5000, 1, 1)])

    def test_everything_skipped(self):
        policy = DetectionPolicy(sweep_N=(5000,), sweep_T=(1,), sweep_l=(1,))
        with self.assertRaises(SweepError):
            robustness_sweep(crash_series(), AnalysisConfig(N=64, t0=1400), policy)

    def test_reference_date_label(self):
        labels = [f"day{i:05d}" for i in range(CRASH_LENGTH)]
        series = as_series(self.series.values, labels)
        policy = DetectionPolicy(sweep_N=(1000,), sweep_T=(1,), sweep_l=(1,))
        report = robustness_sweep(series, CRASH_CONFIG, policy, reference_index=labels[CRASH_INDEX])
        flagged = [e for e in report.events if e.lead_time is not None]
        self.assertTrue(flagged)
        for event in flagged:
            self.assertEqual(event.lead_time, CRASH_INDEX - event.t_prime)
            self.assertEqual(event.label, labels[event.t_prime] if event.t_prime < CRASH_LENGTH else None)


@unittest.skipUnless(os.environ.get("AVR_DOW_JONES_CSV"), "AVR_DOW_JONES_CSV not set")
class TestBlackMonday(unittest.TestCase):
    """Daily Dow Jones closes spanning 1986-1988"""

    def test_jump_before_black_monday(self):
        series = parse_series(os.environ["AVR_DOW_JONES_CSV"])
        crash = next(i for i, label in enumerate(series.labels) if label >= "1987-10-19")
        config = AnalysisConfig(N=min(1000, crash - 120))
        results = run(series, config)

        flagged = [
            r for r in results
            if r.zeta is not None and crash - 7 <= r.t_prime <= crash
            and prior_median(results, r.n) is not None
            and r.zeta >= 10 * prior_median(results, r.n)
        ]
        self.assertTrue(flagged, "no jump within 7 windows before 1987-10-19")

        reference = noise_reference(series, config)
        self.assertGreaterEqual(max(zeta_values(results)), 10 * reference.summary['max'])


if __name__ == '__main__':
    unittest.main()
