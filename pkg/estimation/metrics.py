"""
metrics.py - Localization metrics
ONE RESPONSIBILITY: RMSE and success probability over trials
"""

import math
from typing import Sequence, Tuple

import numpy as np

# |error| <= delta is inclusive; the slack absorbs rounding of theta +- delta
BOUNDARY_SLACK = 1e-12


def angular_errors(estimates: Sequence[float], truth) -> np.ndarray:
    """Absolute errors; truth may be one angle or one per estimate."""
    estimates = np.asarray(estimates, dtype=float)
    if estimates.size == 0:
        raise ValueError("no estimates given")
    return np.abs(estimates - np.asarray(truth, dtype=float))


def success_and_rmse(estimates: Sequence[float], truth, delta: float) -> Tuple[float, float]:
    """
    RMSE and success fraction.

    Args:
        estimates: Estimated angles (radians)
        truth: True angle, or one per estimate (radians)
        delta: Success threshold (radians)

    Returns:
        tuple: (rmse in radians, p_success in [0, 1])
    """
    errors = angular_errors(estimates, truth)
    rmse = float(np.sqrt(np.mean(errors ** 2)))
    p_success = float(np.mean(errors <= delta + BOUNDARY_SLACK))
    return rmse, p_success


def rmse_band(errors: Sequence[float], k: float = 3.0) -> Tuple[float, float]:
    """k-sigma band of the RMSE estimate (delta method on the squared errors)."""
    squared = np.asarray(errors, dtype=float) ** 2
    rmse = math.sqrt(float(np.mean(squared)))
    if rmse == 0 or squared.size < 2:
        return rmse, rmse
    spread = float(np.std(squared, ddof=1)) / math.sqrt(squared.size) / (2.0 * rmse)
    return max(0.0, rmse - k * spread), rmse + k * spread


def success_band(p_success: float, trials: int, k: float = 3.0) -> Tuple[float, float]:
    """k-sigma binomial band of a success fraction."""
    spread = math.sqrt(max(p_success * (1.0 - p_success), 0.0) / trials)
    return max(0.0, p_success - k * spread), min(1.0, p_success + k * spread)
