"""
reflection.py - IRS reflection schedules and the average-power objective
ONE RESPONSIBILITY: Build, evaluate and verify reflection schedules
"""

import csv
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from core.config import ScenarioConfig
from model import channel, geometry

UNIT_MODULUS_TOL = 1e-9
P1_MAX_ELEMENTS = 6
P1_MAX_SNAPSHOTS = 8


class ReflectionError(ValueError):
    """A schedule violates a reflection constraint or a size limit."""


@dataclass(frozen=True)
class ReflectionSchedule:
    """N x T matrix of unit-modulus reflection coefficients, column t is phi[t]."""

    theta_matrix: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.theta_matrix, dtype=complex)
        if matrix.ndim != 2:
            raise ReflectionError("theta_matrix must be 2-D (elements x snapshots)")
        if not np.allclose(np.abs(matrix), 1.0, rtol=0.0, atol=UNIT_MODULUS_TOL):
            raise ReflectionError("every reflection coefficient must have unit modulus")
        matrix.setflags(write=False)
        object.__setattr__(self, "theta_matrix", matrix)

    @property
    def n(self) -> int:
        return self.theta_matrix.shape[0]

    @property
    def t(self) -> int:
        return self.theta_matrix.shape[1]

    @property
    def phases(self) -> np.ndarray:
        """omega_{n,t} in radians."""
        return np.angle(self.theta_matrix)

    def column(self, index: int) -> np.ndarray:
        return self.theta_matrix[:, index]


def dft_schedule(n: int, t: int) -> ReflectionSchedule:
    """First N columns of the T x T DFT matrix, transposed to N x T."""
    if n < 1 or t < n:
        raise ReflectionError(f"DFT schedule needs T >= N >= 1, got N={n}, T={t}")
    element = np.arange(n).reshape(-1, 1)
    snapshot = np.arange(t).reshape(1, -1)
    return ReflectionSchedule(np.exp(-2j * np.pi * element * snapshot / t))


def random_phase_schedule(n: int, t: int, rng: np.random.Generator) -> ReflectionSchedule:
    """Independent uniform phases per element and snapshot."""
    return ReflectionSchedule(np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=(n, t))))


def constant_schedule(n: int, t: int) -> ReflectionSchedule:
    return ReflectionSchedule(np.ones((n, t), dtype=complex))


def reflection_covariance(schedule: ReflectionSchedule) -> np.ndarray:
    """R_phi = (1/T) Theta Theta^H."""
    theta = schedule.theta_matrix
    r_phi = theta @ theta.conj().T / schedule.t
    return (r_phi + r_phi.conj().T) / 2.0


def _layout_for(schedule: ReflectionSchedule, cfg: ScenarioConfig):
    if schedule.n != cfg.layout.n_h:
        raise ReflectionError(
            f"schedule has {schedule.n} elements but the layout has N_h={cfg.layout.n_h}")
    return cfg.layout


def trace_objective(r_phi: np.ndarray, q: np.ndarray, m: int) -> np.ndarray:
    """
    tr(R_phi B) with B = M q^* q^T, for one q (N,) or a grid of them (N, G).
    """
    q = np.asarray(q)
    if q.ndim == 1:
        return m * np.real(q @ r_phi @ q.conj())
    return m * np.real(np.einsum("ng,nk,kg->g", q, r_phi, q.conj()))


def average_power_objective(schedule: ReflectionSchedule, cfg: ScenarioConfig) -> float:
    """
    Average received echo power at the sensors.

    E[|gamma_r|^2] tr(R_phi B) + M E[|alpha_d|^2], scaled by the transmit power;
    the fading cross terms vanish in expectation.
    """
    layout = _layout_for(schedule, cfg)
    gamma_power = channel.reflected_gain(cfg) ** 2 * abs(channel.controller_gain(cfg)) ** 2 * cfg.eta_r
    direct_power = channel.direct_gain(cfg) ** 2
    q = geometry.combined_manifold(cfg.theta, cfg.angles, layout)
    trace = trace_objective(reflection_covariance(schedule), q, layout.m)
    return cfg.tx_power * (gamma_power * trace + layout.m * direct_power)


@dataclass
class P1Report:
    unit_modulus_ok: bool
    unit_diagonal_ok: bool
    trace_identity_ok: bool
    worst_case: float
    reference: float
    samples: int
    sampled_best: float
    violations: List[int] = field(default_factory=list)

    @property
    def omnidirectional(self) -> bool:
        """Worst case equals tr(B) = N M."""
        return bool(np.isclose(self.worst_case, self.reference, rtol=1e-10))

    @property
    def ok(self) -> bool:
        return (self.unit_modulus_ok and self.unit_diagonal_ok
                and self.trace_identity_ok and not self.violations)


def worst_case_trace(schedule: ReflectionSchedule, cfg: ScenarioConfig,
                     theta_grid: np.ndarray) -> float:
    """min over theta of tr(R_phi B(theta))."""
    layout = replace(cfg.layout, n_h=schedule.n)
    q_grid = geometry.combined_manifold(theta_grid, cfg.angles, layout)
    return float(np.min(trace_objective(reflection_covariance(schedule), q_grid, layout.m)))


def verify_p1_optimality(schedule: ReflectionSchedule, cfg: ScenarioConfig,
                         theta_grid: Optional[np.ndarray] = None,
                         samples: int = 200, seed: int = 0) -> P1Report:
    """
    Check the power-maximization constraints and worst-case optimality of a schedule.

    B is sampled from the realizable family M q^*(theta) q^T(theta) on a theta grid.
    Random unit-modulus schedules of the same size whose worst case beats the
    given schedule are listed as violations.

    Args:
        schedule: Schedule with N <= 6 and T <= 8
        cfg: Scene supplying M, spacings and angles (N_h is taken from the schedule)
        theta_grid: Radians; defaults to 181 points over [-90, 90] degrees
        samples: Number of random schedules to compare against
        seed: Seed for the random schedules

    Returns:
        P1Report
    """
    if schedule.n > P1_MAX_ELEMENTS or schedule.t > P1_MAX_SNAPSHOTS:
        raise ReflectionError(
            f"Optimality check is limited to N <= {P1_MAX_ELEMENTS}, T <= {P1_MAX_SNAPSHOTS}")
    if theta_grid is None:
        theta_grid = np.radians(np.linspace(-90.0, 90.0, 181))

    layout = replace(cfg.layout, n_h=schedule.n)
    r_phi = reflection_covariance(schedule)
    unit_modulus_ok = bool(np.allclose(np.abs(schedule.theta_matrix), 1.0, atol=UNIT_MODULUS_TOL))
    unit_diagonal_ok = bool(np.allclose(np.diag(r_phi).real, 1.0, atol=1e-12))

    q_grid = geometry.combined_manifold(theta_grid, cfg.angles, layout)
    identity_trace = trace_objective(np.eye(schedule.n), q_grid, layout.m)
    b_traces = layout.m * np.sum(np.abs(q_grid) ** 2, axis=0)
    trace_identity_ok = bool(np.allclose(identity_trace, b_traces, rtol=1e-12))

    worst = worst_case_trace(schedule, cfg, theta_grid)
    rng = np.random.default_rng(seed)
    violations = []
    sampled_best = -np.inf
    for index in range(samples):
        candidate = random_phase_schedule(schedule.n, schedule.t, rng)
        value = worst_case_trace(candidate, cfg, theta_grid)
        sampled_best = max(sampled_best, value)
        if value > worst + 1e-9:
            violations.append(index)

    return P1Report(
        unit_modulus_ok=unit_modulus_ok,
        unit_diagonal_ok=unit_diagonal_ok,
        trace_identity_ok=trace_identity_ok,
        worst_case=worst,
        reference=float(schedule.n * layout.m),
        samples=samples,
        sampled_best=float(sampled_best),
        violations=violations,
    )


def schedule_to_csv(schedule: ReflectionSchedule, path) -> None:
    """Write phases in radians; row = element, column = snapshot."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["element"] + [f"t{t + 1}" for t in range(schedule.t)])
            for n, row in enumerate(schedule.phases):
                writer.writerow([n + 1] + [repr(float(v)) for v in row])
    except OSError as e:
        raise OSError(f"Cannot write schedule to {path}: {e}") from e
