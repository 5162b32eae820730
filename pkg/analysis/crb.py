"""
crb.py - Cramer-Rao bound on the target DOA
ONE RESPONSIBILITY: Closed-form bound, FIM-block pipeline and a
finite-difference FIM oracle for the same observation model

Observation model (one block of T snapshots):
    y[t] ~ CN(xi alpha_CI eta_r b(theta) q^T(theta) (phi[t] + c), sigma^2 I)
with unknowns [theta, Re xi, Im xi]. xi carries the transmit amplitude.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from core.config import ScenarioConfig
from model import channel, geometry

FD_STEP = 1e-6


class DegenerateFimError(ArithmeticError):
    """The nuisance block of the FIM is singular."""


@dataclass
class CrbReport:
    crb_closed: float
    crb_pipeline: float
    crb_fd: float
    w1: float
    w2: float
    xi: complex
    sigma_fun: float
    sigma_bar_fun: float
    p_theta: float
    fim: np.ndarray


def spacing_weights(cfg: ScenarioConfig) -> Tuple[float, float]:
    """(w1, w2) = (pi^2 d_s^2 / lambda^2, pi^2 d_I^2 / lambda^2)."""
    lam = cfg.layout.wavelength
    return (math.pi ** 2 * cfg.layout.d_s ** 2 / lam ** 2,
            math.pi ** 2 * cfg.layout.d_i ** 2 / lam ** 2)


def sigma_functions(cfg: ScenarioConfig, theta: Optional[float] = None) -> Tuple[float, float]:
    """(varsigma(theta), varsigma_bar(theta)); the controller term is shared."""
    theta = cfg.theta if theta is None else theta
    a = cfg.angles
    controller_term = math.sin(a.theta_ci_h) * math.sin(a.theta_ci_v)
    return (math.cos(theta) * math.sin(a.theta_it_v) + controller_term,
            math.sin(theta) * math.sin(a.theta_it_v) + controller_term)


def effective_xi(cfg: ScenarioConfig, beta_r: complex = 1.0, beta_d: complex = 1.0) -> complex:
    """
    The larger (in modulus) of alpha_r and alpha_d, times the transmit amplitude.
    Unit fading moduli give the deterministic value.
    """
    alpha_r = beta_r * channel.reflected_gain(cfg)
    alpha_d = beta_d * channel.direct_gain(cfg)
    strongest = alpha_r if abs(alpha_r) >= abs(alpha_d) else alpha_d
    return complex(strongest) * math.sqrt(cfg.tx_power)


def _cascade(cfg: ScenarioConfig) -> complex:
    """alpha_CI eta_r."""
    return channel.controller_gain(cfg) * cfg.eta_amplitude


def _check_schedule(schedule, cfg: ScenarioConfig) -> None:
    if schedule.n != cfg.layout.n_h:
        raise ValueError(f"schedule has {schedule.n} elements, layout has N_h={cfg.layout.n_h}")


def p_correction(cfg: ScenarioConfig, schedule, theta: Optional[float] = None) -> float:
    """
    p(theta) = Re{ 2 / (T conj(alpha_CI eta_r))
                   sum_t sum_n phi[t]_n exp(j (N + 1 - 2n) pi (d_I / lambda) varsigma_bar) }.
    """
    n = cfg.layout.n_h
    _, sigma_bar = sigma_functions(cfg, theta)
    index = np.arange(1, n + 1)
    phase = np.exp(1j * (n + 1 - 2 * index) * math.pi * cfg.layout.d_i / cfg.layout.wavelength * sigma_bar)
    total = np.sum(schedule.theta_matrix.T @ phase)
    return float(np.real(2.0 / (schedule.t * np.conj(_cascade(cfg))) * total))


def crb_closed_form(cfg: ScenarioConfig, schedule, theta: Optional[float] = None,
                    xi: Optional[complex] = None, noise_var: Optional[float] = None) -> float:
    """
    Closed-form CRB (radians^2):

        CRB = 1/2 / [ T |xi alpha_CI eta_r|^2 / sigma^2 * ( w2 (N^3 - N)/6 varsigma^2 M
              + w1 (M^3 - M)/6 cos^2 N + w1 (M^3 - M)/6 cos^2 / |alpha_CI eta_r|^2
              + w1 (M^3 - M)/6 cos^2 p(theta) ) ]

    Returns inf when xi = 0 or the bracket is not positive.
    """
    _check_schedule(schedule, cfg)
    theta = cfg.theta if theta is None else theta
    xi = effective_xi(cfg) if xi is None else xi
    sigma2 = cfg.noise_var if noise_var is None else noise_var
    n, m, t = cfg.layout.n_h, cfg.layout.m, schedule.t
    w1, w2 = spacing_weights(cfg)
    sigma, _ = sigma_functions(cfg, theta)
    cascade_power = abs(_cascade(cfg)) ** 2
    cos2 = math.cos(theta) ** 2
    sensor_sum = w1 * (m ** 3 - m) / 6.0 * cos2

    bracket = (w2 * (n ** 3 - n) / 6.0 * sigma ** 2 * m
               + sensor_sum * n
               + sensor_sum / cascade_power
               + sensor_sum * p_correction(cfg, schedule, theta))
    scale = t * abs(xi) ** 2 * cascade_power / sigma2
    information = scale * bracket
    if information <= 0:
        return math.inf
    return 0.5 / information


def auxiliary_vector(cfg: ScenarioConfig) -> np.ndarray:
    """c: 1 / (alpha_CI eta_r) at the configured index, zeros elsewhere."""
    c = np.zeros(cfg.layout.n_h, dtype=complex)
    c[cfg.auxiliary_index - 1] = 1.0 / _cascade(cfg)
    return c


def augmented_covariance(cfg: ScenarioConfig, schedule, auxiliary: bool = True) -> np.ndarray:
    """R_c = (1/T) sum_t (phi[t] + c)(phi[t] + c)^H."""
    chi = schedule.theta_matrix
    if auxiliary:
        chi = chi + auxiliary_vector(cfg)[:, None]
    r_c = chi @ chi.conj().T / schedule.t
    return (r_c + r_c.conj().T) / 2.0


def schur_crb(fim: np.ndarray) -> float:
    """[F_tt - F_tx F_xx^-1 F_xt]^-1 for the first parameter."""
    f_tt, f_tx, f_xx = fim[0, 0], fim[0, 1:], fim[1:, 1:]
    if np.linalg.matrix_rank(f_xx) < f_xx.shape[0]:
        raise DegenerateFimError("nuisance block of the FIM is singular")
    effective = f_tt - f_tx @ linalg.solve(f_xx, f_tx, assume_a="sym")
    if effective <= 0:
        return math.inf
    return float(1.0 / effective)


def crb_appendix_pipeline(cfg: ScenarioConfig, schedule, theta: Optional[float] = None,
                          xi: Optional[complex] = None, noise_var: Optional[float] = None,
                          auxiliary: bool = True) -> Tuple[float, np.ndarray]:
    """
    CRB from the FIM blocks

        f_tt = 2T|xi a|^2/sigma^2 (q^H R_c^T q ||b_dot||^2 + M q_dot^H R_c^T q_dot)
        f_tx = 2TM|a|^2/sigma^2 Re{ conj(xi) q^H R_c^T q_dot (1, j) }
        f_xx = 2TM|a|^2/sigma^2 q^H R_c^T q I_2

    with a = alpha_CI eta_r.

    The theta/Im xi entry has the opposite sign to the Gaussian FIM of
    crb_fd_oracle. The Schur complement uses f_tx only through |f_tx|^2 since
    f_xx is a multiple of I_2, so the CRB is the same.

    Returns:
        tuple: (CRB in radians^2, 3x3 FIM over [theta, Re xi, Im xi])
    """
    _check_schedule(schedule, cfg)
    theta = cfg.theta if theta is None else theta
    xi = effective_xi(cfg) if xi is None else complex(xi)
    sigma2 = cfg.noise_var if noise_var is None else noise_var
    m = cfg.layout.m

    r_c_t = augmented_covariance(cfg, schedule, auxiliary).T
    q = geometry.combined_manifold(theta, cfg.angles, cfg.layout)
    b_dot, q_dot = geometry.manifold_derivatives(theta, cfg.angles, cfg.layout)
    q_r_q = float(np.real(q.conj() @ r_c_t @ q))
    qd_r_qd = float(np.real(q_dot.conj() @ r_c_t @ q_dot))
    cross = complex(q.conj() @ r_c_t @ q_dot)

    prefactor = 2.0 * schedule.t * abs(_cascade(cfg)) ** 2 / sigma2
    f_tt = prefactor * abs(xi) ** 2 * (q_r_q * float(np.sum(np.abs(b_dot) ** 2)) + m * qd_r_qd)
    weighted = np.conj(xi) * cross
    f_tx = prefactor * m * np.array([np.real(weighted), np.real(1j * weighted)])
    f_xx = prefactor * m * q_r_q * np.eye(2)

    fim = np.zeros((3, 3))
    fim[0, 0] = f_tt
    fim[0, 1:] = f_tx
    fim[1:, 0] = f_tx
    fim[1:, 1:] = f_xx
    return schur_crb(fim), fim


def _mean_matrix(cfg, schedule, theta, xi, chi):
    b = geometry.sensor_response(theta, cfg.layout)
    q = geometry.combined_manifold(theta, cfg.angles, cfg.layout)
    return xi * _cascade(cfg) * np.outer(b, q @ chi)


def crb_fd_oracle(cfg: ScenarioConfig, schedule, theta: Optional[float] = None,
                  xi: Optional[complex] = None, noise_var: Optional[float] = None,
                  derivative: str = "fd", step: float = FD_STEP) -> Tuple[float, np.ndarray]:
    """
    CRB from the Gaussian FIM F_ij = (2/sigma^2) sum_t Re{d_i mu_t^H d_j mu_t}.

    derivative="fd" differentiates the mean by central differences on
    [theta, Re xi, Im xi]; derivative="analytic" uses the manifold derivatives.
    """
    _check_schedule(schedule, cfg)
    theta = cfg.theta if theta is None else theta
    xi = effective_xi(cfg) if xi is None else complex(xi)
    sigma2 = cfg.noise_var if noise_var is None else noise_var
    chi = schedule.theta_matrix + auxiliary_vector(cfg)[:, None]

    if derivative == "fd":
        d_theta = (_mean_matrix(cfg, schedule, theta + step, xi, chi)
                   - _mean_matrix(cfg, schedule, theta - step, xi, chi)) / (2.0 * step)
        d_re = (_mean_matrix(cfg, schedule, theta, xi + step, chi)
                - _mean_matrix(cfg, schedule, theta, xi - step, chi)) / (2.0 * step)
        d_im = (_mean_matrix(cfg, schedule, theta, xi + 1j * step, chi)
                - _mean_matrix(cfg, schedule, theta, xi - 1j * step, chi)) / (2.0 * step)
    elif derivative == "analytic":
        b = geometry.sensor_response(theta, cfg.layout)
        q = geometry.combined_manifold(theta, cfg.angles, cfg.layout)
        b_dot, q_dot = geometry.manifold_derivatives(theta, cfg.angles, cfg.layout)
        a = _cascade(cfg)
        d_theta = xi * a * (np.outer(b_dot, q @ chi) + np.outer(b, q_dot @ chi))
        d_re = a * np.outer(b, q @ chi)
        d_im = 1j * d_re
    else:
        raise ValueError(f"derivative must be 'fd' or 'analytic', got {derivative!r}")

    derivatives = (d_theta, d_re, d_im)
    fim = np.empty((3, 3))
    for i, d_i in enumerate(derivatives):
        for j, d_j in enumerate(derivatives):
            fim[i, j] = 2.0 / sigma2 * float(np.real(np.sum(np.conj(d_i) * d_j)))
    fim = (fim + fim.T) / 2.0
    return schur_crb(fim), fim


def crb_fading_average(cfg: ScenarioConfig, schedule, draws: int = 1000, seed: int = 0,
                       method: str = "closed") -> float:
    """
    Mean CRB over fading draws of beta_r, beta_d.

    Both bounds scale as 1/|xi|^2, so one evaluation at the deterministic xi
    is rescaled per draw.
    """
    rng = np.random.default_rng(seed)
    reference_xi = effective_xi(cfg)
    if method == "closed":
        reference = crb_closed_form(cfg, schedule, xi=reference_xi)
    elif method == "pipeline":
        reference, _ = crb_appendix_pipeline(cfg, schedule, xi=reference_xi)
    else:
        raise ValueError(f"method must be 'closed' or 'pipeline', got {method!r}")
    if not math.isfinite(reference):
        return math.inf

    betas = channel.draw_fading(rng, "rayleigh", size=(draws, 2))
    alpha_r = np.abs(betas[:, 0]) * channel.reflected_gain(cfg)
    alpha_d = np.abs(betas[:, 1]) * channel.direct_gain(cfg)
    xi_power = np.maximum(alpha_r, alpha_d) ** 2 * cfg.tx_power
    return float(np.mean(reference * abs(reference_xi) ** 2 / xi_power))


def crb_report(cfg: ScenarioConfig, schedule, theta: Optional[float] = None) -> CrbReport:
    theta = cfg.theta if theta is None else theta
    w1, w2 = spacing_weights(cfg)
    sigma, sigma_bar = sigma_functions(cfg, theta)
    pipeline, fim = crb_appendix_pipeline(cfg, schedule, theta)
    fd, _ = crb_fd_oracle(cfg, schedule, theta)
    return CrbReport(
        crb_closed=crb_closed_form(cfg, schedule, theta),
        crb_pipeline=pipeline,
        crb_fd=fd,
        w1=w1,
        w2=w2,
        xi=effective_xi(cfg),
        sigma_fun=sigma,
        sigma_bar_fun=sigma_bar,
        p_theta=p_correction(cfg, schedule, theta),
        fim=fim,
    )
