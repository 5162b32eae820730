"""
power_lemmas.py - Closed-form average echo powers
ONE RESPONSIBILITY: Reflected/direct echo powers, element threshold and the
user-aided distance trade-off
"""

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy import optimize

from core.config import ScenarioConfig, derived_distance

# brentq brackets stay this far (relative to d_IT) from the singular endpoints
ENDPOINT_MARGIN = 1e-9


@dataclass
class PowerBreakdown:
    p_r: float
    p_d: float
    p_c: float
    n_th: float
    d_ut: float


def _reflected_numerator(cfg: ScenarioConfig) -> float:
    """N M eta_r lambda^4 kappa."""
    lam = cfg.layout.wavelength
    return cfg.layout.n_h * cfg.layout.m * cfg.eta_r * lam ** 4 * cfg.kappa


def reflected_power(cfg: ScenarioConfig, d_source: float) -> float:
    """Average IRS-reflected echo power with the source d_source from the IRS."""
    denominator = 1024.0 * math.pi ** 5 * cfg.d_it ** 4 * d_source ** 2
    return cfg.tx_power * _reflected_numerator(cfg) / denominator


def direct_power(cfg: ScenarioConfig, d_source_target: float) -> float:
    """Average direct echo power with the source d_source_target from the target."""
    lam = cfg.layout.wavelength
    denominator = 64.0 * math.pi ** 3 * d_source_target ** 2 * cfg.d_it ** 2
    return cfg.tx_power * cfg.layout.m * lam ** 2 * cfg.kappa / denominator


def echo_link_powers(cfg: ScenarioConfig) -> Tuple[float, float]:
    """
    Average reflected and direct echo powers at the sensors.

    Returns:
        tuple: (P_r, P_d) in watts
    """
    return reflected_power(cfg, cfg.d_ci), direct_power(cfg, cfg.d_ct)


def element_threshold(cfg: ScenarioConfig) -> float:
    """Element count above which the reflected echo is the stronger one."""
    lam = cfg.layout.wavelength
    return (cfg.d_it ** 2 * cfg.d_ci ** 2 * 16.0 * math.pi ** 2
            / (cfg.eta_r * lam ** 2 * cfg.d_ct ** 2))


def device_target_distance(d_ui: float, cfg: ScenarioConfig) -> float:
    """d_UT for a device d_ui from the IRS at azimuth theta_ue."""
    return derived_distance(d_ui, cfg.d_it, cfg.theta - cfg.benchmark.theta_ue)


def _collinear(cfg: ScenarioConfig) -> bool:
    return math.isclose(math.cos(cfg.theta - cfg.benchmark.theta_ue), 1.0, abs_tol=1e-12)


def _check_device_distance(d_ui: float, cfg: ScenarioConfig) -> None:
    if not 0.0 < d_ui < cfg.d_it:
        raise ValueError(f"d_UI must lie in (0, {cfg.d_it}), got {d_ui}")


def user_aided_power(d_ui: float, cfg: ScenarioConfig) -> Tuple[float, float, float]:
    """
    Echo powers when a device d_ui from the IRS transmits instead of the controller.

    Returns:
        tuple: (P_r(d_UI), P_d(d_UI), P_c(d_UI))
    """
    _check_device_distance(d_ui, cfg)
    p_r = reflected_power(cfg, d_ui)
    p_d = direct_power(cfg, device_target_distance(d_ui, cfg))
    return p_r, p_d, p_r + p_d


def power_breakdown(d_ui: float, cfg: ScenarioConfig) -> PowerBreakdown:
    p_r, p_d, p_c = user_aided_power(d_ui, cfg)
    return PowerBreakdown(p_r=p_r, p_d=p_d, p_c=p_c, n_th=element_threshold(cfg),
                          d_ut=device_target_distance(d_ui, cfg))


def combined_power_derivative(d_ui: float, cfg: ScenarioConfig) -> float:
    """
    dP_c/dd_UI.

    With the device on the IRS->target line the derivative is evaluated as the
    single fraction
        (-2 N M eta lambda^4 kappa (d_IT - d)^3 + 32 M lambda^2 kappa pi^2 d_IT^2 d^3)
        / (1024 pi^5 d_IT^4 d^3 (d_IT - d)^3);
    otherwise the general law-of-cosines form is differentiated.
    """
    _check_device_distance(d_ui, cfg)
    lam, kappa, m = cfg.layout.wavelength, cfg.kappa, cfg.layout.m
    d_it = cfg.d_it
    if _collinear(cfg):
        gap = d_it - d_ui
        numerator = (-2.0 * _reflected_numerator(cfg) * gap ** 3
                     + 32.0 * m * lam ** 2 * kappa * math.pi ** 2 * d_it ** 2 * d_ui ** 3)
        denominator = 1024.0 * math.pi ** 5 * d_it ** 4 * d_ui ** 3 * gap ** 3
        return cfg.tx_power * numerator / denominator

    d_ut = device_target_distance(d_ui, cfg)
    reflected_term = -2.0 * reflected_power(cfg, d_ui) / d_ui
    d_ut_rate = (d_ui - d_it * math.cos(cfg.theta - cfg.benchmark.theta_ue)) / d_ut
    direct_term = -2.0 * direct_power(cfg, d_ut) / d_ut * d_ut_rate
    return reflected_term + direct_term


def _bracket(cfg: ScenarioConfig) -> Tuple[float, float]:
    return ENDPOINT_MARGIN * cfg.d_it, cfg.d_it * (1.0 - ENDPOINT_MARGIN)


def combined_power_minimizer(cfg: ScenarioConfig) -> float:
    """
    Closed-form minimizer of P_c for a collinear device:
    d* = d_IT r / (1 + r), r = (N eta lambda^2 / (16 pi^2 d_IT^2))^(1/3).
    """
    if not _collinear(cfg):
        raise ValueError("closed-form minimizer assumes the device lies on the IRS->target line")
    lam = cfg.layout.wavelength
    r = (cfg.layout.n_h * cfg.eta_r * lam ** 2 / (16.0 * math.pi ** 2 * cfg.d_it ** 2)) ** (1.0 / 3.0)
    return cfg.d_it * r / (1.0 + r)


def combined_power_minimizer_root(cfg: ScenarioConfig) -> float:
    """Minimizer of P_c by bracketed root finding on dP_c/dd_UI."""
    low, high = _bracket(cfg)
    return optimize.brentq(combined_power_derivative, low, high, args=(cfg,), xtol=1e-14, rtol=1e-14)


def equal_power_distance(cfg: ScenarioConfig) -> float:
    """d_UI at which the reflected and direct echoes carry equal power."""
    def gap(d_ui):
        p_r, p_d, _ = user_aided_power(d_ui, cfg)
        return math.log(p_r) - math.log(p_d)

    low, high = _bracket(cfg)
    return optimize.brentq(gap, low, high, xtol=1e-14, rtol=1e-14)


def power_sweep(cfg: ScenarioConfig, d_values) -> List[dict]:
    """One row per d_UI: distances, powers (W) and dP_c/dd_UI."""
    rows = []
    for d_ui in np.asarray(d_values, dtype=float):
        p_r, p_d, p_c = user_aided_power(float(d_ui), cfg)
        rows.append({
            "d_ui_m": float(d_ui),
            "d_ut_m": device_target_distance(float(d_ui), cfg),
            "p_r": p_r,
            "p_d": p_d,
            "p_c": p_c,
            "dp_c": combined_power_derivative(float(d_ui), cfg),
        })
    return rows
