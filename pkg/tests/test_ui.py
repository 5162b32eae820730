"""
test_ui.py - Table formatting and the trial progress bar
"""

import io
import os
import sys
import unittest
from unittest.mock import patch

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from ui import display, progress


class TestDisplay(unittest.TestCase):

    def test_format_value(self):
        self.assertEqual(display.format_value(float("nan")), "-")
        self.assertEqual(display.format_value(None), "-")
        self.assertEqual(display.format_value(float("-inf")), "-inf")
        self.assertEqual(display.format_value(1.0 / 3.0, 3), "0.333")
        self.assertEqual(display.format_value(12), "12")

    def test_format_time(self):
        self.assertEqual(display.format_time(-1), "calculating...")
        self.assertEqual(display.format_time(42), "42s")
        self.assertEqual(display.format_time(3725), "1h 2m 5s")

    @patch("builtins.print")
    def test_empty_table(self, mock_print):
        display.print_table(["a"], [])
        mock_print.assert_called_once_with("  (No data)")

    @patch("builtins.print")
    def test_table_columns_align(self, mock_print):
        display.print_table(["scheme", "rmse"], [["PROPOSED", "0.1"], ["BTS", "0.25"]])
        lines = [call.args[0] for call in mock_print.call_args_list]
        self.assertEqual(len(lines), 4)
        self.assertEqual(len({line.index("│") for line in (lines[0], lines[2], lines[3])}), 1)


class TestTrialProgress(unittest.TestCase):

    def test_redraws_only_on_new_percent(self):
        stream = io.StringIO()
        bar = progress.TrialProgress("PROPOSED", 400, stream=stream)
        for _ in range(400):
            bar.advance()
        output = stream.getvalue()
        self.assertEqual(output.count("\r"), 101)
        self.assertTrue(output.endswith("\n"))
        self.assertIn("100%", output)

    def test_disabled_is_silent(self):
        stream = io.StringIO()
        bar = progress.TrialProgress("BTS", 10, enabled=False, stream=stream)
        bar.advance(10)
        self.assertEqual(stream.getvalue(), "")
        self.assertEqual(bar.done, 10)

    def test_ascii_fallback(self):
        stream = io.TextIOWrapper(io.BytesIO(), encoding="ascii")
        progress.show_progress_bar("run", 50, stream=stream)
        stream.seek(0)
        self.assertIn("#" * 20 + "-" * 20, stream.read())


if __name__ == '__main__':
    unittest.main()
