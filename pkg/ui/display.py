"""
display.py - Terminal output for the CLI
ONE RESPONSIBILITY: Status lines, headers and result tables
"""

import math
import sys


class Colors:
    """ANSI codes; empty strings when the target stream is not a terminal."""
    RED = '\033[91m'
    GREEN = '\033[92m'
    YELLOW = '\033[93m'
    BLUE = '\033[94m'
    CYAN = '\033[96m'
    BOLD = '\033[1m'
    END = '\033[0m'

    @classmethod
    def paint(cls, stream, color, text):
        if not getattr(stream, "isatty", lambda: False)():
            return text
        return f"{color}{text}{cls.END}"


def _status(symbol, color, text, stream=None):
    stream = stream or sys.stdout
    print(Colors.paint(stream, color, f"{symbol} {text}"), file=stream)


def print_header(text, width=70):
    rule = Colors.paint(sys.stdout, Colors.BLUE, "=" * width)
    print(f"\n{rule}")
    print(Colors.paint(sys.stdout, Colors.BOLD + Colors.CYAN, text.center(width)))
    print(f"{rule}\n")


def print_success(text):
    _status("✓", Colors.GREEN, text)


def print_error(text):
    _status("✗", Colors.RED, text, stream=sys.stderr)


def print_warning(text):
    _status("⚠ ", Colors.YELLOW, text)


def print_info(text):
    _status("ℹ ", Colors.CYAN, text)


def _is_number(cell):
    try:
        float(cell)
    except (TypeError, ValueError):
        return False
    return True


def print_table(headers, rows):
    """
    Print rows under headers; numeric cells are right-aligned.

    Cells that are not strings go through format_value first.
    """
    if not rows:
        print("  (No data)")
        return

    cells = [[c if isinstance(c, str) else format_value(c) for c in row] for row in rows]
    widths = [max(len(str(h)), *(len(row[i]) for row in cells)) for i, h in enumerate(headers)]

    print("  " + " │ ".join(str(h).ljust(w) for h, w in zip(headers, widths)))
    print("  " + "─┼─".join("─" * w for w in widths))
    for row in cells:
        print("  " + " │ ".join(c.rjust(w) if _is_number(c) else c.ljust(w) for c, w in zip(row, widths)))


def format_value(value, digits=6):
    """Short significant-digit form for tables; CSV files keep full precision."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "-"
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if isinstance(value, float):
        return f"{value:.{digits}g}"
    return str(value)


def format_time(seconds):
    """Seconds as "1h 2m 5s", "2m 5s" or "5s"."""
    if seconds < 0:
        return "calculating..."
    minutes, secs = divmod(int(seconds), 60)
    hours, minutes = divmod(minutes, 60)
    if hours:
        return f"{hours}h {minutes}m {secs}s"
    if minutes:
        return f"{minutes}m {secs}s"
    return f"{secs}s"
