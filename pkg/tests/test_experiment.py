"""
test_experiment.py - Monte Carlo engine: seeding, aggregation, failures and plans
"""

import math
import os
import sys
import tempfile
import textwrap
import unittest
from unittest.mock import MagicMock, patch

import numpy as np

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.config import ScenarioConfig
from core.config_manager import ConfigError
from harness import experiment, results
from harness.experiment import ExperimentPlan
from harness.schemes import SchemeId, TrialOutcome


def make_plan(**changes):
    settings = dict(base=ScenarioConfig(fading="unit"), sweep_param="tx_power", sweep_values=(10.0,),
                    schemes=(SchemeId.PROPOSED,), trials=4, seed=3)
    settings.update(changes)
    return ExperimentPlan(**settings)


def write_plan(directory, body):
    path = os.path.join(directory, "plan.toml")
    with open(path, "w", encoding="utf-8") as f:
        f.write(textwrap.dedent(body))
    return path


class TestSeeding(unittest.TestCase):

    def test_seed_sequence_is_positional(self):
        a = experiment.trial_seed(0, SchemeId.BTS, 1, 5)
        b = experiment.trial_seed(0, SchemeId.BTS, 1, 5)
        c = experiment.trial_seed(0, SchemeId.BTS, 1, 6)
        self.assertEqual(a.generate_state(4).tolist(), b.generate_state(4).tolist())
        self.assertNotEqual(a.generate_state(4).tolist(), c.generate_state(4).tolist())
        self.assertEqual(a.spawn_key, (list(SchemeId).index(SchemeId.BTS), 1, 5))

    def test_single_trial_matches_chunked_run(self):
        plan = make_plan(trials=5)
        chunk = experiment.trial_outcomes(plan, SchemeId.PROPOSED, 0)
        alone = experiment.run_single_trial(plan, SchemeId.PROPOSED, 0, 3)
        self.assertEqual(alone.theta_hat, chunk[3].theta_hat)
        self.assertEqual(alone.rx_power, chunk[3].rx_power)


class TestRunExperiment(unittest.TestCase):

    def test_noiseless_single_trial(self):
        plan = make_plan(trials=1, noiseless=True)
        row = experiment.run_experiment(plan, workers=1).rows[0]
        self.assertLess(row.rmse_deg, 1e-7)
        self.assertEqual(row.p_success, 1.0)
        self.assertEqual(row.failed, 0)
        self.assertGreater(row.crb_deg2, 0.0)

    def test_rows_follow_plan_order(self):
        plan = make_plan(schemes=(SchemeId.BTS, SchemeId.PROPOSED), sweep_values=(0.0, 10.0), trials=2)
        result = experiment.run_experiment(plan, workers=1)
        self.assertEqual([(r.scheme, r.sweep_value) for r in result.rows],
                         [("BTS", 0.0), ("BTS", 10.0), ("PROPOSED", 0.0), ("PROPOSED", 10.0)])
        self.assertTrue(all(math.isnan(r.crb_deg2) for r in result.for_scheme("BTS")))
        self.assertTrue(all(r.crb_deg2 > 0 for r in result.for_scheme("PROPOSED")))

    def test_same_seed_same_bytes(self):
        plan = make_plan(schemes=(SchemeId.PROPOSED, SchemeId.BTS), trials=6)
        with tempfile.TemporaryDirectory() as tmp:
            first = results.emit_results(experiment.run_experiment(plan, workers=1), os.path.join(tmp, "a.csv"))
            second = results.emit_results(experiment.run_experiment(plan, workers=1), os.path.join(tmp, "b.csv"))
            with open(first, "rb") as f_a, open(second, "rb") as f_b:
                self.assertEqual(f_a.read(), f_b.read())

    def test_worker_pool_matches_serial_run(self):
        plan = make_plan(trials=2 * experiment.CHUNK_TRIALS + 3)
        serial = experiment.run_experiment(plan, workers=1)
        pooled = experiment.run_experiment(plan, workers=2)
        self.assertTrue(serial.same_as(pooled))

    def test_success_grows_with_transmit_power(self):
        plan = make_plan(sweep_values=(-20.0, 10.0), trials=40)
        low, high = experiment.run_experiment(plan, workers=1).rows
        self.assertEqual(high.p_success, 1.0)
        self.assertLess(low.p_success, high.p_success)
        self.assertGreater(high.mean_rx_power_dbm, low.mean_rx_power_dbm)

    def test_failed_trial_is_counted_and_logged(self):
        outcome = TrialOutcome(theta_hat=0.5, truth=0.5, rx_power=1e-12)
        fake = MagicMock()
        fake.run_trial.side_effect = [RuntimeError("boom"), outcome, outcome, outcome]
        plan = make_plan(trials=4)
        with patch("harness.experiment.build_scheme_channel", return_value=fake), \
                patch("harness.experiment.logger") as mock_logger:
            row = experiment.run_experiment(plan, workers=1).rows[0]
        self.assertEqual(row.failed, 1)
        self.assertAlmostEqual(row.p_success, 0.75)
        self.assertEqual(row.rmse_deg, 0.0)
        logged = " ".join(str(call.args[0]) for call in mock_logger.log_error.call_args_list)
        self.assertIn("trial_index=0", logged)
        self.assertIn("seed=3", logged)

    def test_scheme_setup_failure_fails_every_trial(self):
        plan = make_plan(trials=4, sweep_values=(0.0, 10.0))
        with patch("harness.experiment.build_scheme_channel", side_effect=RuntimeError("no geometry")), \
                patch("harness.experiment.logger") as mock_logger:
            rows = experiment.run_experiment(plan, workers=1).rows
        self.assertEqual(len(rows), 2)
        for row in rows:
            self.assertEqual(row.failed, plan.trials)
            self.assertEqual(row.p_success, 0.0)
            self.assertTrue(math.isnan(row.rmse_deg))
        self.assertEqual(mock_logger.log_error.call_count, 8)
        self.assertIn("no geometry", mock_logger.log_error.call_args.args[0])

    def test_invalid_plan_rejected_before_running(self):
        plan = make_plan(trials=0)
        with patch("harness.experiment._run_trials") as mock_run:
            with self.assertRaises(ConfigError) as ctx:
                experiment.run_experiment(plan, workers=1)
        mock_run.assert_not_called()
        self.assertEqual(ctx.exception.key, "plan.trials")


class TestPointConfig(unittest.TestCase):

    def test_sweep_parameters(self):
        self.assertAlmostEqual(make_plan().point_config(20.0).tx_power, 0.1)
        self.assertEqual(make_plan(sweep_param="M").point_config(6).layout.m, 6)
        self.assertEqual(make_plan(sweep_param="N").point_config(32).layout.n_h, 32)
        self.assertEqual(make_plan(sweep_param="d_IT").point_config(20.0).d_it, 20.0)
        plan = make_plan(sweep_param="d_UI", schemes=(SchemeId.MUS,))
        self.assertIs(plan.point_config(5.0), plan.base)
        self.assertEqual(plan.fixed_user_distance(5.0), 5.0)
        self.assertIsNone(make_plan().fixed_user_distance(5.0))

    def test_d_it_sweep_rederives_direct_distance(self):
        cfg = make_plan(sweep_param="d_IT").point_config(20.0)
        self.assertAlmostEqual(cfg.d_ct, math.sqrt(0.25 + 400.0 - 20.0 * math.cos(math.radians(60.0))))


class TestPlanFiles(unittest.TestCase):

    def test_load_plan(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_plan(tmp, """
                [plan]
                schemes = ["PROPOSED", "proposed-random-phase"]
                trials = 7
                seed = 11

                [sweep]
                param = "N"
                values = [16, 32]

                [outputs]
                csv = "out.csv"
            """)
            plan = ExperimentPlan.from_file(path, seed=5)
        self.assertEqual(plan.schemes, (SchemeId.PROPOSED, SchemeId.PROPOSED_RANDOM_PHASE))
        self.assertEqual((plan.trials, plan.seed), (7, 5))
        self.assertEqual(plan.sweep_values, (16, 32))
        self.assertEqual(plan.outputs["csv"], "out.csv")

    def test_base_station_scheme_needs_explicit_geometry(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_plan(tmp, """
                [plan]
                schemes = ["PROPOSED", "BTB"]

                [benchmark]
                theta_i_deg = 80.0
                theta_b_deg = 80.0
                bs_tx = 64
                bs_rx = 8
            """)
            with self.assertRaises(ConfigError) as ctx:
                ExperimentPlan.from_file(path)
        self.assertEqual(ctx.exception.key, "benchmark.d_bi_m")

    def test_unknown_scheme(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_plan(tmp, """
                [plan]
                schemes = ["SONAR"]
            """)
            with self.assertRaises(ConfigError) as ctx:
                ExperimentPlan.from_file(path)
        self.assertEqual(ctx.exception.key, "plan.schemes")

    def test_unsorted_sweep(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_plan(tmp, """
                [sweep]
                param = "tx_power"
                values = [10.0, 0.0]
            """)
            with self.assertRaises(ConfigError) as ctx:
                ExperimentPlan.from_file(path)
        self.assertEqual(ctx.exception.key, "sweep.values")

    def test_dft_schedule_needs_snapshots(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_plan(tmp, """
                [sweep]
                param = "N"
                values = [32, 128]
            """)
            with self.assertRaises(ConfigError) as ctx:
                ExperimentPlan.from_file(path)
        self.assertEqual(ctx.exception.key, "sweep.values")

    def test_shipped_plans_load(self):
        plans_dir = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "plans")
        for name in sorted(os.listdir(plans_dir)):
            with self.subTest(plan=name):
                plan = ExperimentPlan.from_file(os.path.join(plans_dir, name))
                self.assertGreaterEqual(plan.trials, 1)

    def test_distance_plan_sweeps_target_distance(self):
        plans_dir = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "plans")
        plan = ExperimentPlan.from_file(os.path.join(plans_dir, "distance_sweep.toml"))
        self.assertEqual(plan.sweep_param, "d_IT")
        self.assertEqual(list(plan.sweep_values), sorted(plan.sweep_values))
        distances = [plan.point_config(value).d_it for value in plan.sweep_values]
        self.assertEqual(distances, [5.0, 10.0, 20.0, 30.0, 40.0])


class TestAcceptance(unittest.TestCase):
    """Monte Carlo checks at 1000 trials."""

    def test_music_rmse_tracks_the_bound(self):
        plan = make_plan(sweep_values=(14.0,), trials=1000, seed=0)
        outcomes = experiment.trial_outcomes(plan, SchemeId.PROPOSED, 0)
        errors = np.degrees([o.error for o in outcomes])
        rmse = float(np.sqrt(np.mean(errors ** 2)))
        bound = math.sqrt(experiment.attached_crb(plan, SchemeId.PROPOSED, plan.point_config(14.0)))
        self.assertGreaterEqual(rmse, bound)
        self.assertLessEqual(rmse, 3.0 * bound)

    def test_proposed_beats_base_station_schemes(self):
        from estimation.metrics import rmse_band

        plan = make_plan(sweep_values=(0.0,), trials=1000, seed=0,
                         schemes=(SchemeId.PROPOSED, SchemeId.BTB, SchemeId.BITS, SchemeId.BTS))
        bands, powers = {}, {}
        for scheme in plan.schemes:
            outcomes = experiment.trial_outcomes(plan, scheme, 0)
            bands[scheme] = rmse_band([o.error for o in outcomes])
            powers[scheme] = np.mean([o.rx_power for o in outcomes])
        for scheme in (SchemeId.BTB, SchemeId.BITS, SchemeId.BTS):
            self.assertLess(bands[SchemeId.PROPOSED][1], bands[scheme][0], msg=scheme.value)
        self.assertLess(powers[SchemeId.BITS], powers[SchemeId.PROPOSED])


if __name__ == '__main__':
    unittest.main()
