"""
test_schemes.py - Scheme wiring, base-station geometry and noiseless trials
"""

import math
import os
import sys
import unittest

import numpy as np

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.config import BenchmarkGeometry, ScenarioConfig
from estimation import beam_training
from harness import schemes
from harness.schemes import SchemeId
from model import channel, reflection


class TestSchemeId(unittest.TestCase):

    def test_parse_aliases(self):
        self.assertIs(SchemeId.parse("proposed-random-phase"), SchemeId.PROPOSED_RANDOM_PHASE)
        self.assertIs(SchemeId.parse(" bits "), SchemeId.BITS)

    def test_parse_unknown(self):
        with self.assertRaises(ValueError):
            SchemeId.parse("RADAR")

    def test_flags(self):
        self.assertTrue(SchemeId.BTB.uses_base_station)
        self.assertFalse(SchemeId.MUS.uses_base_station)
        self.assertTrue(SchemeId.BITS.uses_dft_schedule)
        self.assertFalse(SchemeId.PROPOSED_RANDOM_PHASE.uses_dft_schedule)


class TestBaseStationView(unittest.TestCase):

    def test_default_geometry(self):
        view = schemes.base_station_view(ScenarioConfig())
        self.assertAlmostEqual(view.d_bt, 72.5386, delta=0.01)
        self.assertAlmostEqual(math.degrees(view.target_angle), -71.87, delta=0.05)
        self.assertAlmostEqual(math.degrees(view.irs_angle), -80.0)
        self.assertEqual(view.tx_layout.m, 64)
        self.assertEqual(view.rx_layout.m, 8)

    def test_target_behind_array_rejected(self):
        cfg = ScenarioConfig(benchmark=BenchmarkGeometry(theta_b=math.radians(-85.0)))
        with self.assertRaises(ValueError):
            schemes.base_station_view(cfg)

    def test_wrap_angle(self):
        self.assertAlmostEqual(schemes.wrap_angle(3 * math.pi / 2), -math.pi / 2)
        self.assertEqual(schemes.wrap_angle(-math.pi), math.pi)

    def test_dft_scanning_has_unit_average_gain(self):
        view = schemes.base_station_view(ScenarioConfig())
        gains = schemes.bs_transmit_gains(view, view.target_angle, 64)
        self.assertAlmostEqual(float(np.mean(np.abs(gains) ** 2)), 1.0, places=10)


class TestNoiselessTrials(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.cfg = ScenarioConfig(fading="unit")

    def _run_outcome(self, scheme, **kwargs):
        built = schemes.build_scheme_channel(scheme, self.cfg, **kwargs)
        return built.run_trial(np.random.default_rng(7), noisy=False)

    def test_sensor_schemes_recover_on_grid_target(self):
        for scheme in (SchemeId.PROPOSED, SchemeId.PROPOSED_RANDOM_PHASE, SchemeId.BTS,
                       SchemeId.BITS, SchemeId.MUS):
            outcome = self._run_outcome(scheme)
            self.assertLess(abs(outcome.error), 1e-9, msg=scheme.value)
            self.assertGreater(outcome.rx_power, 0.0)

    def test_base_station_music_within_one_step(self):
        outcome = self._run_outcome(SchemeId.BTB)
        view = schemes.base_station_view(self.cfg)
        self.assertEqual(outcome.truth, view.target_angle)
        self.assertLessEqual(abs(outcome.error), self.cfg.grid_step)

    def test_beam_training_within_one_codeword(self):
        outcome = self._run_outcome(SchemeId.BITIB)
        self.assertLessEqual(abs(outcome.error), self.cfg.benchmark.beam_grid_step)

    def test_fixed_user_distance(self):
        outcome = self._run_outcome(SchemeId.MUS, d_ui=12.0)
        self.assertLess(abs(outcome.error), 1e-9)


class TestSchemePowers(unittest.TestCase):

    def test_proposed_matches_channel_pipeline(self):
        cfg = ScenarioConfig()
        built = schemes.build_scheme_channel(SchemeId.PROPOSED, cfg)
        synthesized = built.synthesize(np.random.default_rng(5), True)
        rng = np.random.default_rng(5)
        real = channel.draw_realization(cfg, rng)
        direct = channel.simulate_snapshots(cfg, real, reflection.dft_schedule(64, 64), rng)
        np.testing.assert_array_equal(synthesized.y, direct.y)

    def test_bits_receives_less_than_proposed(self):
        cfg = ScenarioConfig(fading="unit")
        rng = np.random.default_rng(1)
        proposed = schemes.build_scheme_channel(SchemeId.PROPOSED, cfg).synthesize(rng, False)
        bits = schemes.build_scheme_channel(SchemeId.BITS, cfg).synthesize(rng, False)
        self.assertLess(bits.echo_power, proposed.echo_power)

    def test_beam_training_power_falls_with_fourth_power_of_distance(self):
        near = ScenarioConfig(d_it=15.0)
        far = ScenarioConfig(d_it=30.0)
        powers = []
        for cfg in (far, near):
            scene = schemes.bitib_scene(cfg, schemes.base_station_view(cfg))
            codebook = beam_training.make_codebook(np.radians(np.arange(-90.0, 90.5, 0.5)),
                                                   cfg.benchmark.theta_i, cfg.layout.n_h,
                                                   cfg.layout.d_i, cfg.layout.wavelength)
            powers.append(beam_training.beam_sweep(scene, codebook).echo_power)
        self.assertAlmostEqual(powers[1] / powers[0], 16.0, places=9)

    def test_user_scenario(self):
        cfg = ScenarioConfig()
        user = schemes.user_scenario(cfg, 5.0)
        self.assertEqual(user.d_ci, 5.0)
        self.assertEqual(user.d_cs, 5.0)
        self.assertAlmostEqual(user.d_ct, 25.0)
        self.assertEqual(user.angles.theta_ci_h, cfg.benchmark.theta_ue)
        self.assertEqual(schemes.user_scenario(cfg, 30.0).d_ct, cfg.layout.wavelength)


if __name__ == '__main__':
    unittest.main()
