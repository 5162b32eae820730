"""
music.py - Single-target MUSIC direction-of-arrival estimation
ONE RESPONSIBILITY: Covariance, subspace split and spectrum peak search
"""

import csv
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

import numpy as np
from scipy import linalg

from core.config import ArrayLayout
from model import geometry
from model.channel import SnapshotMatrix
from utils import logger

TIE_TOL = 1e-12


@dataclass
class MusicDecomposition:
    r_y: np.ndarray
    signal_basis: np.ndarray
    noise_basis: np.ndarray
    eigenvalues: np.ndarray
    degenerate: bool = False


@dataclass
class DoaEstimate:
    theta_hat: float
    spectrum: np.ndarray
    grid: np.ndarray
    peak_value: float
    peak_index: int
    degenerate: bool = False


def search_grid(step: float) -> np.ndarray:
    """Uniform grid over [-pi/2, pi/2] with the given step (radians)."""
    points = int(round(np.pi / step)) + 1
    return np.radians(np.linspace(-90.0, 90.0, points))


@lru_cache(maxsize=16)
def _cached_manifold(m, d_s, wavelength, step):
    grid = search_grid(step)
    layout = ArrayLayout(m=m, d_s=d_s, wavelength=wavelength)
    manifold = geometry.steering_matrix(grid, layout)
    grid.setflags(write=False)
    manifold.setflags(write=False)
    return grid, manifold


def grid_manifold(layout: ArrayLayout, step: float):
    """(grid, steering matrix) for a layout; cached per array and step."""
    return _cached_manifold(layout.m, layout.d_s, layout.wavelength, step)


def sample_covariance(snapshots: Union[SnapshotMatrix, np.ndarray]) -> np.ndarray:
    """R_Y = (1/T) Y Y^H, symmetrized."""
    y = snapshots.y if isinstance(snapshots, SnapshotMatrix) else np.asarray(snapshots)
    if y.ndim != 2 or y.shape[1] < 1:
        raise ValueError("snapshots must be an M x T matrix with T >= 1")
    r_y = y @ y.conj().T / y.shape[1]
    return (r_y + r_y.conj().T) / 2.0


def decompose(r_y: np.ndarray) -> MusicDecomposition:
    """
    Hermitian eigendecomposition with eigenvalues sorted in descending order.

    The dominant eigenvector spans the signal subspace; the rest span the noise
    subspace. A tie between the signal eigenvalue and the largest noise
    eigenvalue is flagged.
    """
    values, vectors = linalg.eigh(r_y)
    order = np.argsort(values, kind="stable")[::-1]
    values, vectors = values[order], vectors[:, order]
    degenerate = False
    if len(values) > 1:
        scale = max(abs(values[0]), np.finfo(float).tiny)
        degenerate = bool(values[0] - values[1] <= TIE_TOL * scale)
        if degenerate:
            logger.log_warning("MUSIC: signal and noise eigenvalues are tied; subspace split is arbitrary")
    return MusicDecomposition(r_y=r_y, signal_basis=vectors[:, :1], noise_basis=vectors[:, 1:],
                              eigenvalues=values, degenerate=degenerate)


def music_spectrum(decomp: MusicDecomposition, layout: ArrayLayout,
                   grid: Optional[np.ndarray] = None, step: float = np.radians(0.01),
                   refine: bool = False) -> DoaEstimate:
    """
    P(theta) = 1 / (b^H(theta) U_z U_z^H b(theta)) over the grid; theta_hat = argmax.

    Ties resolve to the lowest grid index. With refine=True a parabola through
    the peak and its neighbours moves theta_hat off the grid.
    """
    if layout.m < 2:
        raise ValueError("MUSIC needs at least two sensors")
    if grid is None:
        grid, manifold = grid_manifold(layout, step)
    else:
        grid = np.asarray(grid, dtype=float)
        if grid.size == 0:
            raise ValueError("search grid is empty")
        manifold = geometry.steering_matrix(grid, layout)

    projection = decomp.noise_basis.conj().T @ manifold
    denominator = np.sum(np.abs(projection) ** 2, axis=0)
    spectrum = 1.0 / np.maximum(denominator, np.finfo(float).tiny)
    peak = int(np.argmax(spectrum))
    theta_hat = float(grid[peak])
    if refine and 0 < peak < len(grid) - 1:
        theta_hat = _parabolic_peak(grid, spectrum, peak)
    return DoaEstimate(theta_hat=theta_hat, spectrum=spectrum, grid=grid,
                       peak_value=float(spectrum[peak]), peak_index=peak,
                       degenerate=decomp.degenerate)


def _parabolic_peak(grid, spectrum, peak):
    left, centre, right = np.log(spectrum[peak - 1:peak + 2])
    curvature = left - 2.0 * centre + right
    if curvature >= 0:
        return float(grid[peak])
    offset = 0.5 * (left - right) / curvature
    return float(grid[peak] + offset * (grid[peak + 1] - grid[peak]))


def estimate_doa(snapshots: Union[SnapshotMatrix, np.ndarray], layout: ArrayLayout,
                 step: float = np.radians(0.01), refine: bool = False) -> DoaEstimate:
    """Covariance, decomposition and spectrum search in one call."""
    return music_spectrum(decompose(sample_covariance(snapshots)), layout, step=step, refine=refine)


def spectrum_to_csv(estimate: DoaEstimate, path) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["grid_deg", "p_music"])
            for theta, value in zip(np.degrees(estimate.grid), estimate.spectrum):
                writer.writerow([repr(float(theta)), repr(float(value))])
    except OSError as e:
        raise OSError(f"Cannot write spectrum to {path}: {e}") from e
