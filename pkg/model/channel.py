"""
channel.py - Echo channel synthesis and background calibration
ONE RESPONSIBILITY: Produce sensor snapshots for one channel realization

Snapshot model at the IRS sensors:
    y_0[t] = (g_r[t] + g_d + sum_l (g_r,l[t] + g_d,l) + h_CS) x[t] + z_0[t]
The offline phase records the target-free background per reflection pattern;
the online phase subtracts it, which doubles the noise variance.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Union

import numpy as np

from core.config import AngleSet, ScenarioConfig
from model import geometry

SeedLike = Union[int, np.random.Generator, np.random.SeedSequence, None]


class BackgroundError(LookupError):
    """A snapshot's reflection pattern has no calibration entry."""


def free_space_gain(distance: float, wavelength: float) -> complex:
    """lambda / (4 pi d) e^{j 2 pi d / lambda}."""
    return wavelength / (4.0 * np.pi * distance) * np.exp(2j * np.pi * distance / wavelength)


def radar_gain(wavelength: float, kappa: float, d_in: float, d_out: float) -> float:
    """Amplitude of a target bounce: sqrt(lambda^2 kappa / (64 pi^3 d_in^2 d_out^2))."""
    return float(np.sqrt(wavelength ** 2 * kappa / (64.0 * np.pi ** 3 * d_in ** 2 * d_out ** 2)))


def controller_gain(cfg: ScenarioConfig) -> complex:
    return free_space_gain(cfg.d_ci, cfg.layout.wavelength)


def reflected_gain(cfg: ScenarioConfig) -> float:
    return radar_gain(cfg.layout.wavelength, cfg.kappa, cfg.d_it, cfg.d_it)


def direct_gain(cfg: ScenarioConfig) -> float:
    return radar_gain(cfg.layout.wavelength, cfg.kappa, cfg.d_ct, cfg.d_it)


def draw_fading(rng: np.random.Generator, fading: str, size=None):
    """CN(0, 1) draws for "rayleigh", unit modulus with uniform phase for "unit"."""
    if fading == "unit":
        return np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=size))
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)


def complex_noise(rng: np.random.Generator, power: float, shape) -> np.ndarray:
    return np.sqrt(power / 2.0) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@dataclass
class ClutterLink:
    reflected_coeff: complex
    direct_coeff: complex
    b: np.ndarray
    q: np.ndarray

    def response(self, phi: np.ndarray) -> np.ndarray:
        """g_r,l(phi) + g_d,l."""
        return (self.reflected_coeff * (self.q @ phi) + self.direct_coeff) * self.b


@dataclass
class ChannelRealization:
    alpha_ci: complex
    beta_r: complex
    beta_d: complex
    g_r_gain: float
    g_d_gain: float
    alpha_r: complex
    alpha_d: complex
    gamma_r: complex
    h_cs: np.ndarray
    b: np.ndarray
    q: np.ndarray
    clutter_links: List[ClutterLink] = field(default_factory=list)


@dataclass
class SnapshotMatrix:
    """Cleaned snapshots y (M x T), raw snapshots y_raw and the residual noise variance."""

    y: np.ndarray
    y_raw: np.ndarray
    noise_var: float
    echo_power: float = float("nan")

    @property
    def m(self) -> int:
        return self.y.shape[0]

    @property
    def t(self) -> int:
        return self.y.shape[1]


def pattern_key(phi: np.ndarray) -> bytes:
    """Hashable key of a reflection vector."""
    return np.round(np.asarray(phi, dtype=complex), 10).tobytes()


def as_generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def draw_realization(cfg: ScenarioConfig, rng_seed: SeedLike) -> ChannelRealization:
    """
    Draw one realization: fading for the target and every clutter, plus all
    deterministic gains. Gains stay fixed over the T snapshots of a block.
    """
    rng = as_generator(rng_seed)
    layout, angles = cfg.layout, cfg.angles
    alpha_ci = controller_gain(cfg)
    beta_r, beta_d = draw_fading(rng, cfg.fading, size=2)
    g_r, g_d = reflected_gain(cfg), direct_gain(cfg)
    alpha_r, alpha_d = beta_r * g_r, beta_d * g_d

    links = []
    for clutter in cfg.clutters:
        beta_rl, beta_dl = draw_fading(rng, cfg.fading, size=2)
        clutter_angles = AngleSet(theta_ci_h=angles.theta_ci_h, theta_ci_v=angles.theta_ci_v,
                                  theta_it_h=clutter.theta_h, theta_it_v=clutter.theta_v)
        d_cl = radar_gain(layout.wavelength, clutter.kappa, clutter.d_c, clutter.d_i)
        r_cl = radar_gain(layout.wavelength, clutter.kappa, clutter.d_i, clutter.d_i)
        links.append(ClutterLink(
            reflected_coeff=beta_rl * r_cl * alpha_ci * cfg.eta_amplitude,
            direct_coeff=beta_dl * d_cl,
            b=geometry.sensor_response(clutter.theta_h, layout),
            q=geometry.combined_manifold(clutter.theta_h, clutter_angles, layout),
        ))

    h_cs = free_space_gain(cfg.d_cs, layout.wavelength) * geometry.sensor_response(cfg.theta_cs, layout)
    return ChannelRealization(
        alpha_ci=alpha_ci,
        beta_r=complex(beta_r),
        beta_d=complex(beta_d),
        g_r_gain=g_r,
        g_d_gain=g_d,
        alpha_r=complex(alpha_r),
        alpha_d=complex(alpha_d),
        gamma_r=complex(alpha_r * alpha_ci * cfg.eta_amplitude),
        h_cs=h_cs,
        b=geometry.sensor_response(cfg.theta, layout),
        q=geometry.combined_manifold(cfg.theta, angles, layout),
        clutter_links=links,
    )


def _check_pattern(cfg: ScenarioConfig, phi: np.ndarray) -> np.ndarray:
    phi = np.asarray(phi, dtype=complex)
    if phi.shape != (cfg.layout.n_h,):
        raise ValueError(
            f"reflection vector has shape {phi.shape}, layout expects ({cfg.layout.n_h},)")
    return phi


def target_echo(cfg: ScenarioConfig, real: ChannelRealization, phi: np.ndarray) -> np.ndarray:
    """(g_r[t] + g_d) x[t] for one reflection vector."""
    phi = _check_pattern(cfg, phi)
    x = np.sqrt(cfg.tx_power)
    return (real.gamma_r * (real.q @ phi) + real.alpha_d) * real.b * x


def background_echo(cfg: ScenarioConfig, real: ChannelRealization, phi: np.ndarray) -> np.ndarray:
    """Clutter links plus the controller leak, times x[t]."""
    phi = _check_pattern(cfg, phi)
    total = real.h_cs.copy()
    for link in real.clutter_links:
        total = total + link.response(phi)
    return total * np.sqrt(cfg.tx_power)


def received_snapshot(cfg: ScenarioConfig, real: ChannelRealization, phi: np.ndarray,
                      rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """
    One raw snapshot y_0[t] for horizontal reflection vector phi (length N_h).

    No noise is added when rng is None.
    """
    y = target_echo(cfg, real, phi) + background_echo(cfg, real, phi)
    if rng is not None:
        y = y + complex_noise(rng, cfg.noise_power, cfg.layout.m)
    return y


def reflected_echo_full(cfg: ScenarioConfig, real: ChannelRealization,
                        phi0: np.ndarray) -> np.ndarray:
    """
    g_r for a full N_h*N_v reflection vector, as a product over the planar array:
    alpha_r alpha_CI b(theta) a^T(theta_IT) diag(phi0) a(theta_CI).
    """
    phi0 = np.asarray(phi0, dtype=complex)
    if phi0.shape != (cfg.layout.n0,):
        raise ValueError(f"full reflection vector must have length {cfg.layout.n0}")
    a_it = geometry.target_response(cfg.angles, cfg.layout)
    a_ci = geometry.controller_response(cfg.angles, cfg.layout)
    cascade = a_it @ np.diag(phi0) @ a_ci
    return real.alpha_r * real.alpha_ci * cascade * real.b


@dataclass
class BackgroundTable:
    entries: Dict[bytes, np.ndarray]
    noise_power: float

    def __len__(self):
        return len(self.entries)

    def lookup(self, phi: np.ndarray, index: int) -> np.ndarray:
        try:
            return self.entries[pattern_key(phi)]
        except KeyError:
            raise BackgroundError(f"no calibration entry for the pattern of snapshot {index}")


def calibrate_background(cfg: ScenarioConfig, real: ChannelRealization, schedule,
                         rng: Optional[np.random.Generator] = None) -> BackgroundTable:
    """
    Offline phase: record the target-free received signal once per distinct pattern.

    Probing uses the online amplitude x = sqrt(tx_power) (x = 1 at unit power).
    """
    entries = {}
    for t in range(schedule.t):
        phi = schedule.column(t)
        key = pattern_key(phi)
        if key in entries:
            continue
        y_int = background_echo(cfg, real, phi)
        if rng is not None:
            y_int = y_int + complex_noise(rng, cfg.noise_power, cfg.layout.m)
        entries[key] = y_int
    return BackgroundTable(entries=entries, noise_power=cfg.noise_power)


def raw_snapshots(cfg: ScenarioConfig, real: ChannelRealization, schedule,
                  rng: Optional[np.random.Generator] = None) -> np.ndarray:
    return np.column_stack([received_snapshot(cfg, real, schedule.column(t), rng)
                            for t in range(schedule.t)])


def cancel_background(y_raw: np.ndarray, table: BackgroundTable, schedule) -> SnapshotMatrix:
    """Online phase: y[t] = y_0[t] - background(phi[t])."""
    if y_raw.shape[1] != schedule.t:
        raise ValueError(f"{y_raw.shape[1]} snapshots but the schedule has {schedule.t}")
    background = np.column_stack([table.lookup(schedule.column(t), t)
                                  for t in range(schedule.t)])
    return SnapshotMatrix(y=y_raw - background, y_raw=y_raw, noise_var=2.0 * table.noise_power)


def simulate_snapshots(cfg: ScenarioConfig, real: ChannelRealization, schedule,
                       rng: Optional[np.random.Generator] = None) -> SnapshotMatrix:
    """Calibrate, receive and cancel in one call; noiseless when rng is None."""
    table = calibrate_background(cfg, real, schedule, rng)
    y_raw = raw_snapshots(cfg, real, schedule, rng)
    snapshots = cancel_background(y_raw, table, schedule)
    echo = np.column_stack([target_echo(cfg, real, schedule.column(t)) for t in range(schedule.t)])
    snapshots.echo_power = float(np.mean(np.sum(np.abs(echo) ** 2, axis=0)))
    return snapshots
