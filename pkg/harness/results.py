"""
results.py - Aggregated experiment results and their CSV form
ONE RESPONSIBILITY: Hold, write and read result rows
"""

import csv
import math
import os
from dataclasses import dataclass, field, fields
from typing import List

CSV_COLUMNS = ("scheme", "sweep_param", "sweep_value", "rmse_deg", "p_success",
               "mean_rx_power_dbm", "crb_deg2", "trials", "seed", "failed")


@dataclass
class ResultRow:
    scheme: str
    sweep_param: str
    sweep_value: float
    rmse_deg: float
    p_success: float
    mean_rx_power_dbm: float
    crb_deg2: float
    trials: int
    seed: int
    failed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p_success <= 1.0:
            raise ValueError(f"p_success must lie in [0, 1], got {self.p_success}")
        if self.rmse_deg < 0:
            raise ValueError(f"rmse_deg must be >= 0, got {self.rmse_deg}")

    def same_as(self, other: "ResultRow") -> bool:
        """Field-wise equality where nan equals nan."""
        for f in fields(self):
            a, b = getattr(self, f.name), getattr(other, f.name)
            if isinstance(a, float) and isinstance(b, float) and math.isnan(a) and math.isnan(b):
                continue
            if a != b:
                return False
        return True


@dataclass
class ExperimentResult:
    rows: List[ResultRow] = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def for_scheme(self, scheme: str) -> List[ResultRow]:
        return [row for row in self.rows if row.scheme == scheme]

    def same_as(self, other: "ExperimentResult") -> bool:
        return len(self) == len(other) and all(a.same_as(b) for a, b in zip(self.rows, other.rows))


def _format(value) -> str:
    # repr is the shortest string that parses back to the same float
    return repr(float(value)) if isinstance(value, float) else str(value)


def emit_results(result: ExperimentResult, path) -> str:
    """
    Write one CSV with a header row; floats at full precision.

    Returns:
        str: The path written
    """
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for row in result.rows:
                writer.writerow([_format(getattr(row, column)) for column in CSV_COLUMNS])
    except OSError as e:
        raise OSError(f"Cannot write results to {path}: {e}") from e
    return str(path)


def read_results(path) -> ExperimentResult:
    """Parse a CSV written by emit_results."""
    try:
        with open(path, newline="", encoding="utf-8") as f:
            reader = csv.DictReader(f)
            missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
            if missing:
                raise ValueError(f"{path}: missing columns {', '.join(sorted(missing))}")
            rows = [
                ResultRow(
                    scheme=record["scheme"],
                    sweep_param=record["sweep_param"],
                    sweep_value=float(record["sweep_value"]),
                    rmse_deg=float(record["rmse_deg"]),
                    p_success=float(record["p_success"]),
                    mean_rx_power_dbm=float(record["mean_rx_power_dbm"]),
                    crb_deg2=float(record["crb_deg2"]),
                    trials=int(record["trials"]),
                    seed=int(record["seed"]),
                    failed=int(record["failed"]),
                )
                for record in reader
            ]
    except OSError as e:
        raise OSError(f"Cannot read results from {path}: {e}") from e
    return ExperimentResult(rows=rows)
