"""
schemes.py - Sensing schemes and their snapshot synthesizers
ONE RESPONSIBILITY: Wire each scheme's link chain to a receiver and an estimator

Plane geometry: the IRS sits at the origin with its normal on the +y axis; a
point at distance d and azimuth a is d (sin a, cos a). The base station's array
normal is rotated so that the IRS appears at -theta_B in the BS frame.
"""

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Optional

import numpy as np

from analysis.power_lemmas import device_target_distance
from core.config import AngleSet, ArrayLayout, ScenarioConfig
from estimation import beam_training, music
from model import channel, geometry, reflection
from model.channel import SnapshotMatrix


class SchemeId(Enum):
    PROPOSED = "PROPOSED"
    BTB = "BTB"
    BITS = "BITS"
    BTS = "BTS"
    BITIB = "BITIB"
    MUS = "MUS"
    PROPOSED_RANDOM_PHASE = "PROPOSED_RANDOM_PHASE"

    @classmethod
    def parse(cls, name: str) -> "SchemeId":
        key = name.strip().upper().replace("-", "_").replace(" ", "_")
        try:
            return cls[key]
        except KeyError:
            raise ValueError(f"unknown scheme {name!r}; choose from {', '.join(s.value for s in cls)}")

    @property
    def uses_base_station(self) -> bool:
        return self in (SchemeId.BTB, SchemeId.BITS, SchemeId.BTS, SchemeId.BITIB)

    @property
    def uses_dft_schedule(self) -> bool:
        return self in (SchemeId.PROPOSED, SchemeId.BITS, SchemeId.MUS)


@dataclass
class TrialOutcome:
    theta_hat: float
    truth: float
    rx_power: float
    degenerate: bool = False

    @property
    def error(self) -> float:
        return self.theta_hat - self.truth


@dataclass
class SchemeChannel:
    """
    synthesize(rng, noisy) -> SnapshotMatrix; estimate(snapshots) -> DoaEstimate.
    truth is the target angle in the receiver's own frame.
    """

    scheme: SchemeId
    cfg: ScenarioConfig
    truth: float
    synthesize: Callable[[np.random.Generator, bool], SnapshotMatrix]
    estimate: Callable[[SnapshotMatrix], music.DoaEstimate]

    def run_trial(self, rng: np.random.Generator, noisy: bool = True) -> TrialOutcome:
        snapshots = self.synthesize(rng, noisy)
        doa = self.estimate(snapshots)
        return TrialOutcome(theta_hat=doa.theta_hat, truth=self.truth,
                            rx_power=snapshots.echo_power, degenerate=doa.degenerate)


@dataclass(frozen=True)
class BaseStationView:
    """Where the target and the IRS appear from the base station."""

    d_bt: float
    target_angle: float
    irs_angle: float
    tx_layout: ArrayLayout
    rx_layout: ArrayLayout


def position(distance: float, azimuth: float) -> np.ndarray:
    return distance * np.array([math.sin(azimuth), math.cos(azimuth)])


def azimuth_of(vector: np.ndarray) -> float:
    return math.atan2(vector[0], vector[1])


def wrap_angle(angle: float) -> float:
    """Map to (-pi, pi]."""
    wrapped = math.remainder(angle, 2.0 * math.pi)
    return math.pi if wrapped == -math.pi else wrapped


def base_station_view(cfg: ScenarioConfig) -> BaseStationView:
    bench = cfg.benchmark
    bs = position(bench.d_bi, bench.theta_i)
    target = position(cfg.d_it, cfg.theta)
    normal = azimuth_of(-bs) + bench.theta_b
    target_angle = wrap_angle(azimuth_of(target - bs) - normal)
    if abs(target_angle) > math.pi / 2:
        raise ValueError(
            f"target lies behind the base-station array ({math.degrees(target_angle):.2f} deg)")
    layout = cfg.layout
    return BaseStationView(
        d_bt=float(np.linalg.norm(target - bs)),
        target_angle=target_angle,
        irs_angle=-bench.theta_b,
        tx_layout=ArrayLayout(m=bench.bs_tx, d_s=bench.bs_spacing, wavelength=layout.wavelength),
        rx_layout=ArrayLayout(m=bench.bs_rx, d_s=bench.bs_spacing, wavelength=layout.wavelength),
    )


def bs_transmit_gains(view: BaseStationView, direction: float, snapshots: int) -> np.ndarray:
    """a_tx(direction)^T w[t] under the DFT scanning schedule, ||w[t]|| = 1."""
    weights = reflection.dft_schedule(view.tx_layout.m, snapshots).theta_matrix
    return geometry.sensor_response(direction, view.tx_layout) @ weights / math.sqrt(view.tx_layout.m)


def _music_estimator(cfg: ScenarioConfig, layout: ArrayLayout):
    def estimate(snapshots: SnapshotMatrix) -> music.DoaEstimate:
        return music.estimate_doa(snapshots, layout, step=cfg.grid_step, refine=cfg.refine_peak)
    return estimate


def _rank_one_snapshots(steering: np.ndarray, amplitudes: np.ndarray, noise_power: float,
                        rng: np.random.Generator, noisy: bool) -> SnapshotMatrix:
    clean = np.outer(steering, amplitudes)
    y = clean + channel.complex_noise(rng, noise_power, clean.shape) if noisy else clean
    return SnapshotMatrix(y=y, y_raw=y, noise_var=noise_power,
                          echo_power=float(np.mean(np.sum(np.abs(clean) ** 2, axis=0))))


def _proposed_synthesizer(cfg: ScenarioConfig, random_phase: bool = False):
    fixed = None if random_phase else reflection.dft_schedule(cfg.layout.n_h, cfg.snapshots)

    def synthesize(rng, noisy):
        schedule = fixed if fixed is not None else reflection.random_phase_schedule(
            cfg.layout.n_h, cfg.snapshots, rng)
        real = channel.draw_realization(cfg, rng)
        return channel.simulate_snapshots(cfg, real, schedule, rng if noisy else None)
    return synthesize


def user_scenario(cfg: ScenarioConfig, d_ui: float) -> ScenarioConfig:
    """The proposed scene with a mobile user d_ui from the IRS as the transmitter."""
    d_ut = max(device_target_distance(d_ui, cfg), cfg.layout.wavelength)
    angles = replace(cfg.angles, theta_ci_h=cfg.benchmark.theta_ue)
    return replace(cfg, d_ci=d_ui, d_ct=d_ut, angles=angles, d_cs=d_ui,
                   theta_cs=cfg.benchmark.theta_ue)


def _mus_synthesizer(cfg: ScenarioConfig, fixed_d_ui: Optional[float] = None):
    """The user distance is drawn per trial unless fixed_d_ui pins it."""
    bench = cfg.benchmark

    def synthesize(rng, noisy):
        d_ui = fixed_d_ui
        if d_ui is None:
            d_ui = float(rng.uniform(bench.mus_min, bench.mus_range))
        user_cfg = user_scenario(cfg, d_ui)
        return _proposed_synthesizer(user_cfg)(rng, noisy)
    return synthesize


def _bts_synthesizer(cfg: ScenarioConfig, view: BaseStationView):
    gain = channel.radar_gain(cfg.layout.wavelength, cfg.kappa, view.d_bt, cfg.d_it)
    tx = bs_transmit_gains(view, view.target_angle, cfg.snapshots) * math.sqrt(cfg.tx_power)
    b = geometry.sensor_response(cfg.theta, cfg.layout)

    def synthesize(rng, noisy):
        beta = channel.draw_fading(rng, cfg.fading)
        return _rank_one_snapshots(b, beta * gain * tx, cfg.noise_var, rng, noisy)
    return synthesize


def _bits_synthesizer(cfg: ScenarioConfig, view: BaseStationView):
    bs_angles = AngleSet(theta_ci_h=cfg.benchmark.theta_i, theta_ci_v=math.pi / 2,
                         theta_it_h=cfg.theta, theta_it_v=cfg.angles.theta_it_v)
    q_b = geometry.combined_manifold(cfg.theta, bs_angles, cfg.layout)
    schedule = reflection.dft_schedule(cfg.layout.n_h, cfg.snapshots)
    alpha_bi = channel.free_space_gain(cfg.benchmark.d_bi, cfg.layout.wavelength)
    tx = bs_transmit_gains(view, view.irs_angle, cfg.snapshots) * math.sqrt(cfg.tx_power)
    cascade = alpha_bi * channel.reflected_gain(cfg) * cfg.eta_amplitude * (q_b @ schedule.theta_matrix)
    b = geometry.sensor_response(cfg.theta, cfg.layout)

    def synthesize(rng, noisy):
        beta = channel.draw_fading(rng, cfg.fading)
        return _rank_one_snapshots(b, beta * cascade * tx, cfg.noise_var, rng, noisy)
    return synthesize


def _btb_synthesizer(cfg: ScenarioConfig, view: BaseStationView):
    gain = channel.radar_gain(cfg.layout.wavelength, cfg.kappa, view.d_bt, view.d_bt)
    tx = bs_transmit_gains(view, view.target_angle, cfg.snapshots) * math.sqrt(cfg.tx_power)
    rx = geometry.sensor_response(view.target_angle, view.rx_layout)

    def synthesize(rng, noisy):
        beta = channel.draw_fading(rng, cfg.fading)
        return _rank_one_snapshots(rx, beta * gain * tx, cfg.noise_power, rng, noisy)
    return synthesize


def bitib_scene(cfg: ScenarioConfig, view: BaseStationView, beta: complex = 1.0):
    """
    Round trip BS -> IRS -> target -> IRS -> BS with the BS beam locked on the IRS.
    The two IRS passes carry alpha_BI each and the focused BS beam sqrt(N_tx).
    """
    bench = cfg.benchmark
    alpha_bi = channel.free_space_gain(bench.d_bi, cfg.layout.wavelength)
    amplitude = (math.sqrt(cfg.tx_power) * math.sqrt(bench.bs_tx) * alpha_bi ** 2
                 * beta * channel.reflected_gain(cfg) * cfg.eta_r)
    return beam_training.BeamTrainingScene(
        theta=cfg.theta, theta_source=bench.theta_i, n=cfg.layout.n_h, d_i=cfg.layout.d_i,
        wavelength=cfg.layout.wavelength, amplitude=amplitude,
        rx_response=geometry.sensor_response(view.irs_angle, view.rx_layout),
        noise_power=cfg.noise_power)


def _bitib_channel(cfg: ScenarioConfig, view: BaseStationView):
    codebook = beam_training.make_codebook(music.search_grid(cfg.benchmark.beam_grid_step),
                                           cfg.benchmark.theta_i, cfg.layout.n_h,
                                           cfg.layout.d_i, cfg.layout.wavelength)

    def synthesize(rng, noisy):
        scene = bitib_scene(cfg, view, channel.draw_fading(rng, cfg.fading))
        return beam_training.beam_sweep(scene, codebook, rng if noisy else None)

    def estimate(snapshots):
        return beam_training.pick_beam(snapshots, codebook)
    return synthesize, estimate


def build_scheme_channel(scheme: SchemeId, cfg: ScenarioConfig,
                         view: Optional[BaseStationView] = None,
                         d_ui: Optional[float] = None) -> SchemeChannel:
    """
    Build the synthesizer/estimator pair of one scheme.

    Args:
        scheme: Scheme to wire
        cfg: Scene; BS schemes also read cfg.benchmark
        view: Precomputed base-station view, derived from cfg when omitted
        d_ui: Fixed MUS user distance (meters); drawn per trial when omitted

    Returns:
        SchemeChannel
    """
    sensors = _music_estimator(cfg, cfg.layout)
    if scheme is SchemeId.PROPOSED:
        return SchemeChannel(scheme, cfg, cfg.theta, _proposed_synthesizer(cfg), sensors)
    if scheme is SchemeId.PROPOSED_RANDOM_PHASE:
        return SchemeChannel(scheme, cfg, cfg.theta, _proposed_synthesizer(cfg, random_phase=True), sensors)
    if scheme is SchemeId.MUS:
        return SchemeChannel(scheme, cfg, cfg.theta, _mus_synthesizer(cfg, d_ui), sensors)

    view = view or base_station_view(cfg)
    if scheme is SchemeId.BTS:
        return SchemeChannel(scheme, cfg, cfg.theta, _bts_synthesizer(cfg, view), sensors)
    if scheme is SchemeId.BITS:
        return SchemeChannel(scheme, cfg, cfg.theta, _bits_synthesizer(cfg, view), sensors)
    if scheme is SchemeId.BTB:
        return SchemeChannel(scheme, cfg, view.target_angle, _btb_synthesizer(cfg, view),
                             _music_estimator(cfg, view.rx_layout))
    if scheme is SchemeId.BITIB:
        synthesize, estimate = _bitib_channel(cfg, view)
        return SchemeChannel(scheme, cfg, cfg.theta, synthesize, estimate)
    raise ValueError(f"unsupported scheme {scheme}")
