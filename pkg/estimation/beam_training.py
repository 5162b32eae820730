"""
beam_training.py - On-grid beam training through the IRS
ONE RESPONSIBILITY: Sweep IRS beams and pick the strongest round trip

Used when the IRS has no sensors: the base station illuminates the IRS, each
codeword steers the reflection towards one candidate angle, and the echo
returns over the same IRS path to the base-station receive array.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from estimation.music import DoaEstimate
from model import geometry
from model.channel import SnapshotMatrix, complex_noise


@dataclass(frozen=True)
class BeamCodebook:
    grid: np.ndarray        # candidate target angles, radians
    beams: np.ndarray       # N x K reflection vectors, column k steers to grid[k]


@dataclass
class BeamTrainingScene:
    """
    One BITIB round trip.

    amplitude: every scalar factor of the round trip except the two IRS array gains
    rx_response: base-station receive response towards the IRS
    """

    theta: float
    theta_source: float
    n: int
    d_i: float
    wavelength: float
    amplitude: complex
    rx_response: np.ndarray
    noise_power: float


def cascade_phase(theta, theta_source, d_i, wavelength):
    """Horizontal phase of the source->IRS->theta cascade."""
    return 2.0 * d_i / wavelength * (np.sin(theta) + np.sin(theta_source))


def make_codebook(grid: np.ndarray, theta_source: float, n: int, d_i: float,
                  wavelength: float) -> BeamCodebook:
    """Co-phasing reflection for every candidate angle."""
    grid = np.asarray(grid, dtype=float)
    phases = cascade_phase(grid, theta_source, d_i, wavelength)
    return BeamCodebook(grid=grid, beams=np.conj(geometry.steering_vector(phases, n)))


def round_trip_gains(scene: BeamTrainingScene, codebook: BeamCodebook) -> np.ndarray:
    """IRS gain of each codeword, squared because the echo crosses the IRS twice."""
    target = geometry.steering_vector(
        cascade_phase(scene.theta, scene.theta_source, scene.d_i, scene.wavelength), scene.n)
    return (codebook.beams.T @ target) ** 2


def beam_sweep(scene: BeamTrainingScene, codebook: BeamCodebook,
               rng: Optional[np.random.Generator] = None) -> SnapshotMatrix:
    """
    One snapshot per codeword at the base-station receive array (rx x K).
    Noiseless when rng is None.
    """
    clean = scene.amplitude * np.outer(scene.rx_response, round_trip_gains(scene, codebook))
    received = clean
    if rng is not None:
        received = clean + complex_noise(rng, scene.noise_power, clean.shape)
    echo_power = float(np.mean(np.sum(np.abs(clean) ** 2, axis=0)))
    return SnapshotMatrix(y=received, y_raw=received, noise_var=scene.noise_power,
                          echo_power=echo_power)


def pick_beam(snapshots: SnapshotMatrix, codebook: BeamCodebook) -> DoaEstimate:
    """theta_hat is the codeword with the largest received energy; ties go to the lowest index."""
    energy = np.sum(np.abs(snapshots.y) ** 2, axis=0)
    peak = int(np.argmax(energy))
    return DoaEstimate(theta_hat=float(codebook.grid[peak]), spectrum=energy,
                       grid=codebook.grid, peak_value=float(energy[peak]), peak_index=peak)


def beam_training_estimate(scene: BeamTrainingScene, codebook: BeamCodebook,
                           rng: Optional[np.random.Generator] = None) -> DoaEstimate:
    return pick_beam(beam_sweep(scene, codebook, rng), codebook)
