"""
oracle_suite.py - Fast analytic and numerical self-checks
ONE RESPONSIBILITY: Run the checks behind `main.py validate`
"""

import math
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np

from analysis import consistency, crb, power_lemmas
from core.config import ScenarioConfig
from estimation import music
from model import channel, geometry, reflection
from utils import logger


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str


def check_dft_schedule() -> Tuple[bool, str]:
    schedule = reflection.dft_schedule(64, 64)
    r_phi = reflection.reflection_covariance(schedule)
    deviation = float(np.max(np.abs(r_phi - np.eye(64))))
    return deviation < 1e-12, f"max |R_phi - I| = {deviation:.3e}"


def check_centroid_symmetry() -> Tuple[bool, str]:
    cfg = ScenarioConfig()
    worst = 0.0
    for theta in np.radians(np.linspace(-90.0, 90.0, 181)):
        b = geometry.sensor_response(theta, cfg.layout)
        q = geometry.combined_manifold(theta, cfg.angles, cfg.layout)
        b_dot, q_dot = geometry.manifold_derivatives(theta, cfg.angles, cfg.layout)
        worst = max(worst, abs(np.vdot(b, b_dot)), abs(np.vdot(q, q_dot)))
    norm_error = abs(np.sum(np.abs(geometry.steering_vector(0.37, 64)) ** 2) - 64)
    return worst < 1e-10 and norm_error < 1e-12, f"max |b^H b_dot|, |q^H q_dot| = {worst:.3e}"


def check_noiseless_music(targets: int = 10, seed: int = 0) -> Tuple[bool, str]:
    rng = np.random.default_rng(seed)
    base = ScenarioConfig(fading="unit")
    schedule = reflection.dft_schedule(base.layout.n_h, base.snapshots)
    misses = 0
    for hundredths in rng.integers(-8000, 8001, size=targets):
        theta = math.radians(hundredths / 100.0)
        cfg = base.with_updates(theta_it_h=theta)
        real = channel.draw_realization(cfg, rng)
        estimate = music.estimate_doa(channel.simulate_snapshots(cfg, real, schedule), cfg.layout)
        if abs(estimate.theta_hat - theta) > 1e-9:
            misses += 1
    return misses == 0, f"{targets - misses}/{targets} on-grid targets recovered exactly"


def check_power_identities() -> Tuple[bool, str]:
    cfg = ScenarioConfig()
    p_r, p_d = power_lemmas.echo_link_powers(cfg)
    schedule = reflection.dft_schedule(cfg.layout.n_h, cfg.snapshots)
    objective = reflection.average_power_objective(schedule, cfg)
    n_th = power_lemmas.element_threshold(cfg)
    at_threshold = power_lemmas.reflected_power(cfg, cfg.d_ci) * n_th / cfg.layout.n_h
    ok = math.isclose(objective, p_r + p_d, rel_tol=1e-12) and math.isclose(at_threshold, p_d, rel_tol=1e-12)
    return ok, f"P_r + P_d = {p_r + p_d:.6e} W, objective = {objective:.6e} W, N_th = {n_th:.4f}"


def check_user_distance_minimizer() -> Tuple[bool, str]:
    cfg = ScenarioConfig(eta_r=900.0 / 64.0)
    root = power_lemmas.combined_power_minimizer_root(cfg)
    closed = power_lemmas.combined_power_minimizer(cfg)
    ok = abs(root - 1.785) <= 1e-3 and abs(root - closed) < 1e-9
    return ok, f"d_UI* = {root:.6f} m (closed form {closed:.6f} m)"


def check_crb_oracle(seed: int = 0) -> Tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n, m, t in ((4, 4, 4), (8, 4, 8), (8, 8, 8)):
        cfg = ScenarioConfig().with_updates(n_h=n, m=m, snapshots=t)
        schedule = reflection.dft_schedule(n, t)
        for theta in rng.uniform(-1.3, 1.3, size=5):
            pipeline, _ = crb.crb_appendix_pipeline(cfg, schedule, float(theta))
            oracle, _ = crb.crb_fd_oracle(cfg, schedule, float(theta))
            worst = max(worst, abs(pipeline - oracle) / oracle)
    return worst < 1e-4, f"max relative gap pipeline vs finite differences = {worst:.3e}"


def check_crb_monotonicity() -> Tuple[bool, str]:
    base = ScenarioConfig()
    by_m = [crb.crb_closed_form(base.with_updates(m=m),
                                reflection.dft_schedule(base.layout.n_h, base.snapshots))
            for m in (4, 6, 8, 10)]
    by_n = [crb.crb_closed_form(base.with_updates(n_h=n, snapshots=128), reflection.dft_schedule(n, 128))
            for n in (16, 32, 64, 128)]
    ok = all(np.diff(by_m) < 0) and all(np.diff(by_n) < 0)
    return ok, "CRB decreasing in M and N" if ok else f"M: {by_m}, N: {by_n}"


def check_consistency_report() -> Tuple[bool, str]:
    cfg = ScenarioConfig()
    schedule = reflection.dft_schedule(cfg.layout.n_h, cfg.snapshots)
    report = consistency.crb_consistency_report(cfg, schedule, with_oracle=False)
    return True, (f"{report.classification}: mean ratio {report.mean_ratio:.4f}, "
                  f"max deviation {report.max_deviation:.2%}")


CHECKS: List[Tuple[str, Callable[[], Tuple[bool, str]]]] = [
    ("DFT schedule orthogonality", check_dft_schedule),
    ("Centroid symmetry of the manifolds", check_centroid_symmetry),
    ("Noiseless MUSIC exactness", check_noiseless_music),
    ("Echo power identities and threshold", check_power_identities),
    ("User-distance minimizer", check_user_distance_minimizer),
    ("CRB pipeline vs finite-difference FIM", check_crb_oracle),
    ("CRB monotonicity", check_crb_monotonicity),
    ("CRB consistency report", check_consistency_report),
]


def run_all() -> List[CheckResult]:
    """Run every check; an exception counts as a failure."""
    results = []
    for name, check in CHECKS:
        try:
            ok, detail = check()
        except Exception as e:
            logger.log_exception(f"Check crashed: {name}")
            ok, detail = False, f"{type(e).__name__}: {e}"
        if not ok:
            logger.log_error(f"Check failed: {name}: {detail}")
        results.append(CheckResult(name=name, ok=bool(ok), detail=detail))
    return results
