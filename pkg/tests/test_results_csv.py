"""
test_results_csv.py - Result rows and their CSV form
"""

import math
import os
import sys
import tempfile
import unittest

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from harness.results import (CSV_COLUMNS, ExperimentResult, ResultRow,
                             emit_results, read_results)


def sample_row(**changes):
    values = dict(scheme="PROPOSED", sweep_param="tx_power", sweep_value=10.0, rmse_deg=0.125,
                  p_success=0.9, mean_rx_power_dbm=-98.3, crb_deg2=float("nan"),
                  trials=100, seed=4, failed=2)
    values.update(changes)
    return ResultRow(**values)


class TestResultRow(unittest.TestCase):

    def test_probability_out_of_range(self):
        with self.assertRaises(ValueError):
            sample_row(p_success=1.5)

    def test_negative_rmse(self):
        with self.assertRaises(ValueError):
            sample_row(rmse_deg=-0.1)

    def test_nan_compares_equal(self):
        self.assertTrue(sample_row().same_as(sample_row()))
        self.assertFalse(sample_row().same_as(sample_row(crb_deg2=1.0)))
        self.assertFalse(sample_row().same_as(sample_row(failed=0)))


class TestCsv(unittest.TestCase):

    def test_header_only_for_empty_result(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = emit_results(ExperimentResult(), os.path.join(tmp, "empty.csv"))
            with open(path, encoding="utf-8") as f:
                self.assertEqual(f.read(), ",".join(CSV_COLUMNS) + "\n")
            self.assertEqual(len(read_results(path)), 0)

    def test_values_parse_back(self):
        rows = [sample_row(), sample_row(scheme="BTS", sweep_value=1.0 / 3.0, crb_deg2=2.5e-4)]
        with tempfile.TemporaryDirectory() as tmp:
            path = emit_results(ExperimentResult(rows), os.path.join(tmp, "nested", "out.csv"))
            parsed = read_results(path)
        self.assertTrue(parsed.same_as(ExperimentResult(rows)))
        self.assertEqual(parsed.rows[1].sweep_value, 1.0 / 3.0)
        self.assertTrue(math.isnan(parsed.rows[0].crb_deg2))

    def test_missing_column(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "bad.csv")
            with open(path, "w", encoding="utf-8") as f:
                f.write("scheme,rmse_deg\nPROPOSED,0.1\n")
            with self.assertRaises(ValueError) as ctx:
                read_results(path)
        self.assertIn("failed", str(ctx.exception))

    def test_missing_file(self):
        with self.assertRaises(OSError):
            read_results(os.path.join(tempfile.gettempdir(), "no_such_dir_xyz", "r.csv"))

    def test_for_scheme(self):
        result = ExperimentResult([sample_row(), sample_row(scheme="BTS")])
        self.assertEqual(len(result.for_scheme("BTS")), 1)


if __name__ == '__main__':
    unittest.main()
