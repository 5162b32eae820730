"""
geometry.py - Steering and response vectors of centred uniform arrays
ONE RESPONSIBILITY: Array manifolds and their angle derivatives

All arrays use the centroid as phase origin: entry m (1-based) of an
N-element steering vector carries the exponent (2m - 1 - N) / 2.
"""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from core.config import AngleSet, ArrayLayout

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class SteeringSpec:
    """Spatial phase difference and element count of one steering vector."""

    phase_diff: float
    size: int

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"size must be >= 1, got {self.size}")

    def vector(self) -> np.ndarray:
        return steering_vector(self.phase_diff, self.size)


def centered_offsets(size: int) -> np.ndarray:
    """(2m - 1 - N) / 2 for m = 1..N; symmetric about zero."""
    return (2.0 * np.arange(1, size + 1) - 1.0 - size) / 2.0


def steering_vector(phase_diff: ArrayLike, size: int) -> np.ndarray:
    """
    Steering vector u(phase_diff, size).

    Args:
        phase_diff: Spatial phase difference, scalar or 1-D array
        size: Element count

    Returns:
        np.ndarray: shape (size,) for a scalar phase, (size, G) for G phases
    """
    if size < 1:
        raise ValueError(f"size must be >= 1, got {size}")
    offsets = centered_offsets(size)
    if np.ndim(phase_diff) == 0:
        return np.exp(1j * np.pi * offsets * float(phase_diff))
    return np.exp(1j * np.pi * np.outer(offsets, np.asarray(phase_diff, dtype=float)))


def spatial_directions(theta_h: float, theta_v: float, spacing: float,
                       wavelength: float) -> Tuple[float, float]:
    """Horizontal and vertical spatial directions of a planar array."""
    scale = 2.0 * spacing / wavelength
    return (scale * np.sin(theta_h) * np.sin(theta_v),
            scale * np.cos(theta_v))


def upa_response(theta_h: float, theta_v: float, layout: ArrayLayout) -> np.ndarray:
    """IRS response u(phi_h, N_h) kron u(phi_v, N_v); length N_h * N_v."""
    phi_h, phi_v = spatial_directions(theta_h, theta_v, layout.d_i, layout.wavelength)
    return np.kron(steering_vector(phi_h, layout.n_h), steering_vector(phi_v, layout.n_v))


def controller_response(angles: AngleSet, layout: ArrayLayout) -> np.ndarray:
    return upa_response(angles.theta_ci_h, angles.theta_ci_v, layout)


def target_response(angles: AngleSet, layout: ArrayLayout) -> np.ndarray:
    return upa_response(angles.theta_it_h, angles.theta_it_v, layout)


def sensor_response(theta: ArrayLike, layout: ArrayLayout) -> np.ndarray:
    """b(theta) = u((2 d_s / lambda) sin(theta), M)."""
    return steering_vector(2.0 * layout.d_s / layout.wavelength * np.sin(theta), layout.m)


def steering_matrix(grid: np.ndarray, layout: ArrayLayout) -> np.ndarray:
    """Sensor responses over a search grid, shape (M, len(grid))."""
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    return steering_vector(2.0 * layout.d_s / layout.wavelength * np.sin(grid), layout.m)


def combined_phase(theta: ArrayLike, angles: AngleSet, layout: ArrayLayout) -> ArrayLike:
    """Horizontal phase of the controller->IRS->target cascade for target azimuth theta."""
    scale = 2.0 * layout.d_i / layout.wavelength
    return scale * (np.sin(theta) * np.sin(angles.theta_it_v)
                    + np.sin(angles.theta_ci_h) * np.sin(angles.theta_ci_v))


def combined_manifold(theta: ArrayLike, angles: AngleSet, layout: ArrayLayout) -> np.ndarray:
    """q(theta) = u(phi_tilde, N_h)."""
    return steering_vector(combined_phase(theta, angles, layout), layout.n_h)


def manifold_derivatives(theta: float, angles: AngleSet,
                         layout: ArrayLayout) -> Tuple[np.ndarray, np.ndarray]:
    """
    Analytic derivatives of b(theta) and q(theta) with respect to theta.

    Returns:
        tuple: (b_dot of length M, q_dot of length N_h)
    """
    b = sensor_response(theta, layout)
    b_rate = np.pi * (2.0 * layout.d_s / layout.wavelength) * np.cos(theta)
    b_dot = 1j * centered_offsets(layout.m) * b_rate * b

    q = combined_manifold(theta, angles, layout)
    q_rate = np.pi * (2.0 * layout.d_i / layout.wavelength) * np.cos(theta) * np.sin(angles.theta_it_v)
    q_dot = 1j * centered_offsets(layout.n_h) * q_rate * q
    return b_dot, q_dot


def vertical_phase(angles: AngleSet, layout: ArrayLayout) -> float:
    """Vertical phase of the cascade, phi_IT,v + phi_CI,v."""
    scale = 2.0 * layout.d_i / layout.wavelength
    return scale * (np.cos(angles.theta_it_v) + np.cos(angles.theta_ci_v))


def aligned_vertical_reflection(angles: AngleSet, layout: ArrayLayout) -> np.ndarray:
    """Vertical reflection that co-phases the cascade; its gain is N_v."""
    return np.conj(steering_vector(vertical_phase(angles, layout), layout.n_v))


def vertical_gain(angles: AngleSet, layout: ArrayLayout, phi_v: np.ndarray) -> complex:
    """eta_r = u^T(phi_tilde_v, N_v) phi_v."""
    return complex(steering_vector(vertical_phase(angles, layout), layout.n_v) @ phi_v)
