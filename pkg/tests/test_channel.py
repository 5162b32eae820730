"""
test_channel.py - Echo synthesis, calibration and background cancellation
"""

import dataclasses
import math
import os
import sys
import unittest

import numpy as np

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from analysis import power_lemmas
from core.config import ClutterSpec, ScenarioConfig
from model import channel, geometry, reflection


def cluttered_config(**changes):
    clutters = (
        ClutterSpec(theta_h=math.radians(-20.0), theta_v=math.pi / 2, d_i=12.0, d_c=12.3, kappa=3.0),
        ClutterSpec(theta_h=math.radians(35.0), theta_v=math.pi / 2, d_i=25.0, d_c=24.8, kappa=10.0),
    )
    return ScenarioConfig(clutters=clutters, **changes)


class TestRealization(unittest.TestCase):

    def test_same_seed_same_draw(self):
        cfg = cluttered_config()
        a = channel.draw_realization(cfg, 11)
        b = channel.draw_realization(cfg, 11)
        self.assertEqual(a.beta_r, b.beta_r)
        self.assertEqual(a.beta_d, b.beta_d)
        self.assertEqual(len(a.clutter_links), 2)
        self.assertEqual(a.clutter_links[1].direct_coeff, b.clutter_links[1].direct_coeff)

    def test_unit_fading_has_unit_modulus(self):
        real = channel.draw_realization(ScenarioConfig(fading="unit"), np.random.default_rng(4))
        self.assertAlmostEqual(abs(real.beta_r), 1.0, places=12)
        self.assertAlmostEqual(abs(real.beta_d), 1.0, places=12)

    def test_rayleigh_draws_have_unit_power(self):
        draws = channel.draw_fading(np.random.default_rng(0), "rayleigh", size=200000)
        self.assertAlmostEqual(float(np.mean(np.abs(draws) ** 2)), 1.0, delta=0.02)

    def test_gains(self):
        cfg = ScenarioConfig()
        self.assertAlmostEqual(abs(channel.controller_gain(cfg)), 0.2 / (4 * math.pi * 0.5), places=12)
        expected = math.sqrt(0.04 * cfg.kappa / (64 * math.pi ** 3 * 30.0 ** 4))
        self.assertAlmostEqual(channel.reflected_gain(cfg) / expected, 1.0, places=12)


class TestSnapshots(unittest.TestCase):

    def test_noiseless_cancellation_leaves_target_echo(self):
        cfg = cluttered_config()
        schedule = reflection.dft_schedule(cfg.layout.n_h, cfg.snapshots)
        real = channel.draw_realization(cfg, 5)
        snapshots = channel.simulate_snapshots(cfg, real, schedule)
        echo = np.column_stack([channel.target_echo(cfg, real, schedule.column(t))
                                for t in range(schedule.t)])
        np.testing.assert_allclose(snapshots.y, echo, rtol=0, atol=1e-12 * np.max(np.abs(echo)))
        self.assertEqual(snapshots.y.shape, (cfg.layout.m, cfg.snapshots))

    def test_raw_snapshots_carry_the_background(self):
        cfg = cluttered_config()
        schedule = reflection.dft_schedule(cfg.layout.n_h, cfg.snapshots)
        real = channel.draw_realization(cfg, 5)
        snapshots = channel.simulate_snapshots(cfg, real, schedule)
        self.assertGreater(np.max(np.abs(snapshots.y_raw - snapshots.y)), 0.0)

    def test_cancellation_doubles_noise_variance(self):
        cfg = ScenarioConfig()
        schedule = reflection.dft_schedule(cfg.layout.n_h, cfg.snapshots)
        real = channel.draw_realization(cfg, 1)
        snapshots = channel.simulate_snapshots(cfg, real, schedule, np.random.default_rng(2))
        self.assertEqual(snapshots.noise_var, 2.0 * cfg.noise_power)
        self.assertEqual(snapshots.noise_var, cfg.noise_var)

    def test_residual_noise_power(self):
        cfg = ScenarioConfig(tx_power=1e-12)
        schedule = reflection.dft_schedule(cfg.layout.n_h, cfg.snapshots)
        real = channel.draw_realization(cfg, 1)
        rng = np.random.default_rng(8)
        residuals = [channel.simulate_snapshots(cfg, real, schedule, rng).y for _ in range(20)]
        clean = channel.simulate_snapshots(cfg, real, schedule).y
        power = np.mean([np.mean(np.abs(y - clean) ** 2) for y in residuals])
        self.assertAlmostEqual(power / cfg.noise_var, 1.0, delta=0.05)

    def test_missing_calibration_entry(self):
        cfg = ScenarioConfig()
        real = channel.draw_realization(cfg, 0)
        table = channel.calibrate_background(cfg, real, reflection.dft_schedule(64, 64))
        other = reflection.random_phase_schedule(64, 64, np.random.default_rng(1))
        y_raw = channel.raw_snapshots(cfg, real, other)
        with self.assertRaises(channel.BackgroundError):
            channel.cancel_background(y_raw, table, other)

    def test_calibration_stores_one_entry_per_pattern(self):
        cfg = ScenarioConfig()
        real = channel.draw_realization(cfg, 0)
        self.assertEqual(len(channel.calibrate_background(cfg, real, reflection.constant_schedule(64, 64))), 1)
        self.assertEqual(len(channel.calibrate_background(cfg, real, reflection.dft_schedule(64, 64))), 64)

    def test_single_raw_snapshot(self):
        cfg = cluttered_config()
        real = channel.draw_realization(cfg, 3)
        phi = reflection.dft_schedule(cfg.layout.n_h, cfg.snapshots).column(5)
        clean = channel.received_snapshot(cfg, real, phi)
        np.testing.assert_allclose(clean, channel.target_echo(cfg, real, phi)
                                   + channel.background_echo(cfg, real, phi))
        noisy = channel.received_snapshot(cfg, real, phi, np.random.default_rng(0))
        self.assertEqual(noisy.shape, (cfg.layout.m,))
        self.assertGreater(np.max(np.abs(noisy - clean)), 0.0)
        with self.assertRaises(ValueError):
            channel.received_snapshot(cfg, real, phi[:-1])

    def test_wrong_pattern_length(self):
        cfg = ScenarioConfig()
        real = channel.draw_realization(cfg, 0)
        with self.assertRaises(ValueError):
            channel.target_echo(cfg, real, np.ones(32))


class TestEchoPowers(unittest.TestCase):

    def test_dft_average_matches_reflected_and_direct_powers(self):
        """Unit fading moduli turn the lemma averages into exact block averages."""
        cfg = ScenarioConfig(fading="unit")
        schedule = reflection.dft_schedule(cfg.layout.n_h, cfg.snapshots)
        real = channel.draw_realization(cfg, 3)
        p_r, p_d = power_lemmas.echo_link_powers(cfg)
        x = math.sqrt(cfg.tx_power)
        reflected = np.mean([np.sum(np.abs(real.gamma_r * (real.q @ schedule.column(t)) * real.b * x) ** 2)
                             for t in range(schedule.t)])
        direct = np.sum(np.abs(real.alpha_d * real.b * x) ** 2)
        self.assertAlmostEqual(reflected / p_r, 1.0, places=9)
        self.assertAlmostEqual(direct / p_d, 1.0, places=9)

    def test_monte_carlo_echo_powers(self):
        """Rayleigh-faded echoes average out to the lemma powers."""
        cfg = ScenarioConfig().with_updates(n_h=4, m=2, snapshots=4)
        schedule = reflection.dft_schedule(cfg.layout.n_h, cfg.snapshots)
        columns = [schedule.column(t) for t in range(schedule.t)]
        p_r, p_d = power_lemmas.echo_link_powers(cfg)
        x = math.sqrt(cfg.tx_power)
        rng = np.random.default_rng(9)
        draws = 50000
        reflected = np.empty(draws)
        direct = np.empty(draws)
        for i in range(draws):
            real = channel.draw_realization(cfg, rng)
            g_d_x = real.alpha_d * real.b * x
            direct[i] = np.sum(np.abs(g_d_x) ** 2)
            reflected[i] = np.mean([np.sum(np.abs(channel.target_echo(cfg, real, phi) - g_d_x) ** 2)
                                    for phi in columns])
        self.assertAlmostEqual(float(np.mean(reflected)) / p_r, 1.0, delta=0.02)
        self.assertAlmostEqual(float(np.mean(direct)) / p_d, 1.0, delta=0.02)

    def test_average_power_objective_by_brute_force(self):
        """Per-snapshot echo energy over a random schedule; flipping g_d cancels the cross term."""
        cfg = ScenarioConfig(fading="unit").with_updates(n_h=6, m=3, snapshots=10)
        schedule = reflection.random_phase_schedule(6, 10, np.random.default_rng(3))
        real = channel.draw_realization(cfg, 4)
        flipped = dataclasses.replace(real, alpha_d=-real.alpha_d)
        energies = []
        for t in range(schedule.t):
            phi = schedule.column(t)
            energies.append((np.sum(np.abs(channel.target_echo(cfg, real, phi)) ** 2)
                             + np.sum(np.abs(channel.target_echo(cfg, flipped, phi)) ** 2)) / 2.0)
        objective = reflection.average_power_objective(schedule, cfg)
        self.assertAlmostEqual(float(np.mean(energies)) / objective, 1.0, places=9)

    def test_full_planar_array_factorizes(self):
        """A co-phased vertical pattern reproduces the horizontal model with eta_r = N_v^2."""
        base = ScenarioConfig(fading="unit").with_updates(
            n_h=4, n_v=2, snapshots=4, theta_it_v=math.radians(70.0), theta_ci_v=math.radians(80.0))
        cfg = base.with_updates(eta_r=4.0)
        real = channel.draw_realization(cfg, 2)
        phi_h = np.exp(1j * np.array([0.3, -1.2, 2.0, 0.7]))
        phi_v = geometry.aligned_vertical_reflection(cfg.angles, cfg.layout)
        full = channel.reflected_echo_full(cfg, real, np.kron(phi_h, phi_v))
        horizontal = real.gamma_r * (real.q @ phi_h) * real.b
        np.testing.assert_allclose(full, horizontal, rtol=1e-10, atol=0)


if __name__ == '__main__':
    unittest.main()
