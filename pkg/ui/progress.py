"""
progress.py - Progress bar for Monte Carlo runs
ONE RESPONSIBILITY: Show trial progress
"""

import sys
import time

from ui.display import format_time


def show_progress_bar(label, percent, start_time=None, width=40, stream=None):
    """
    Display progress bar with optional ETA.

    Args:
        label: Operation label
        percent: Progress percentage (0-100)
        start_time: Start timestamp for ETA calculation
        width: Bar width in characters
        stream: Output stream, stdout by default
    """
    stream = stream or sys.stdout
    percent = int(max(0, min(100, percent)))
    filled = int(width * percent / 100)

    try:
        bar = "█" * filled + "░" * (width - filled)
        bar.encode(stream.encoding or "utf-8")
    except (UnicodeEncodeError, LookupError):
        bar = "#" * filled + "-" * (width - filled)

    eta_str = ""
    if start_time and percent > 5:
        elapsed = time.time() - start_time
        remaining = elapsed / percent * 100 - elapsed
        eta_str = f" | ETA: {format_time(remaining)}"

    stream.write(f"\r{label}: [{bar}] {percent:3d}%{eta_str}")
    stream.flush()
    if percent >= 100:
        stream.write("\n")


class TrialProgress:
    """Counts finished trials and redraws the bar when the percentage moves."""

    def __init__(self, label, total, enabled=True, stream=None):
        self.label = label
        self.total = max(1, total)
        self.enabled = enabled
        self.stream = stream
        self.done = 0
        self._shown = -1
        self._start = time.time()

    def advance(self, count=1):
        self.done += count
        percent = int(100 * self.done / self.total)
        if self.enabled and percent != self._shown:
            self._shown = percent
            show_progress_bar(self.label, percent, self._start, stream=self.stream)
