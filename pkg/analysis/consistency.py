"""
consistency.py - Closed-form CRB against the FIM-block pipeline
ONE RESPONSIBILITY: Pointwise ratio over an angle grid and its classification
"""

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from analysis import crb
from core.config import ScenarioConfig
from utils import logger

STRUCTURAL_TOLERANCE = 0.05


def default_theta_grid() -> np.ndarray:
    """37 interior points of a uniform 39-point grid over [-90, 90] degrees; +-90 are singular."""
    return np.radians(np.linspace(-90.0, 90.0, 39)[1:-1])


@dataclass
class ConsistencyReport:
    theta: np.ndarray
    crb_closed: np.ndarray
    crb_pipeline: np.ndarray
    crb_fd: np.ndarray
    ratio: np.ndarray
    mean_ratio: float
    max_deviation: float

    @property
    def classification(self) -> str:
        """"constant-factor" when the ratio stays within 5% of its mean."""
        if self.max_deviation <= STRUCTURAL_TOLERANCE:
            return "constant-factor"
        return "structural"

    @property
    def structural(self) -> bool:
        return self.classification == "structural"


def crb_consistency_report(cfg: ScenarioConfig, schedule,
                           theta_grid: Optional[np.ndarray] = None,
                           with_oracle: bool = True) -> ConsistencyReport:
    """
    Evaluate both bounds on theta_grid and summarize crb_closed / crb_pipeline.

    max_deviation is max |ratio / mean - 1| over the finite ratios.
    """
    theta_grid = default_theta_grid() if theta_grid is None else np.asarray(theta_grid, dtype=float)
    closed = np.empty(theta_grid.size)
    pipeline = np.empty(theta_grid.size)
    oracle = np.full(theta_grid.size, np.nan)
    for i, theta in enumerate(theta_grid):
        closed[i] = crb.crb_closed_form(cfg, schedule, float(theta))
        pipeline[i], _ = crb.crb_appendix_pipeline(cfg, schedule, float(theta))
        if with_oracle:
            oracle[i], _ = crb.crb_fd_oracle(cfg, schedule, float(theta))

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = closed / pipeline
    finite = np.isfinite(ratio)
    if not finite.any():
        raise ValueError("no finite CRB ratio on the grid")
    mean_ratio = float(np.mean(ratio[finite]))
    max_deviation = float(np.max(np.abs(ratio[finite] / mean_ratio - 1.0)))

    report = ConsistencyReport(theta=theta_grid, crb_closed=closed, crb_pipeline=pipeline,
                               crb_fd=oracle, ratio=ratio, mean_ratio=mean_ratio,
                               max_deviation=max_deviation)
    logger.log_info(f"CRB consistency: {report.classification}, mean ratio {mean_ratio:.6g}, "
                    f"max deviation {max_deviation:.3%}")
    return report


def report_to_csv(report: ConsistencyReport, path) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["theta_deg", "crb_closed", "crb_pipeline", "crb_fd", "ratio"])
            for row in zip(np.degrees(report.theta), report.crb_closed, report.crb_pipeline,
                           report.crb_fd, report.ratio):
                writer.writerow([repr(float(v)) for v in row])
    except OSError as e:
        raise OSError(f"Cannot write CRB report to {path}: {e}") from e
