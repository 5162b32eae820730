"""
plan_guard.py - Reject experiment plans that cannot run
ONE RESPONSIBILITY: Validate plans before any trial starts

Every check returns (ok, reason); a failing reason starts with the file key
it is about, e.g. "benchmark.d_bi_m: ...".
"""

from core.constants import MUS_RANGES_M, SWEEP_PARAMETERS
from harness.schemes import SchemeId, base_station_view
from utils import logger

# Keys a BS scheme may not take from the defaults silently
BENCHMARK_REQUIRED_KEYS = ("d_bi_m", "theta_i_deg", "theta_b_deg", "bs_tx", "bs_rx")
CRB_MODES = ("deterministic", "fading")


def check_trials(trials):
    if not isinstance(trials, int) or isinstance(trials, bool) or trials < 1:
        return (False, f"plan.trials: must be an integer >= 1, got {trials!r}")
    return (True, "ok")


def check_schemes(names):
    if not names:
        return (False, "plan.schemes: no scheme selected")
    for name in names:
        try:
            SchemeId.parse(str(name))
        except ValueError as e:
            return (False, f"plan.schemes: {e}")
    return (True, "ok")


def check_sweep(param, values, schemes):
    if param not in SWEEP_PARAMETERS:
        return (False, f"sweep.param: must be one of {', '.join(SWEEP_PARAMETERS)}, got {param!r}")
    if not values:
        return (False, "sweep.values: empty")
    if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in values):
        return (False, "sweep.values: every value must be a number")
    if list(values) != sorted(values):
        return (False, "sweep.values: must be sorted ascending")
    if param in ("M", "N") and any(int(v) != v or v < 1 for v in values):
        return (False, f"sweep.values: {param} values must be positive integers")
    if param == "M" and min(values) < 2:
        return (False, "sweep.values: MUSIC needs M >= 2")
    if param in ("d_IT", "d_UI") and min(values) <= 0:
        return (False, f"sweep.values: {param} values must be positive")
    if param == "d_UI" and any(s is not SchemeId.MUS for s in schemes):
        return (False, "sweep.param: d_UI sweeps apply to the MUS scheme only")
    return (True, "ok")


def check_benchmark_geometry(schemes, raw):
    """BS schemes need the base-station placement spelled out in the file."""
    if raw is None:
        return (True, "ok")
    given = raw.get("benchmark", {})
    if any(s.uses_base_station for s in schemes):
        for key in BENCHMARK_REQUIRED_KEYS:
            if key not in given:
                return (False, f"benchmark.{key}: required by the selected base-station schemes")
    if SchemeId.MUS in schemes:
        if "mus_range_m" not in given:
            return (False, "benchmark.mus_range_m: required by the MUS scheme")
        if given["mus_range_m"] not in MUS_RANGES_M:
            logger.log_warning(f"MUS range {given['mus_range_m']} m is outside the usual {MUS_RANGES_M}")
    return (True, "ok")


def check_point(cfg, schemes, sweep_param):
    """Scheme constraints that depend on one sweep point's scene."""
    if any(s.uses_dft_schedule for s in schemes) and cfg.snapshots < cfg.layout.n_h:
        key = "sweep.values" if sweep_param == "N" else "scenario.snapshots"
        return (False, f"{key}: the DFT schedule needs snapshots >= N ({cfg.snapshots} < {cfg.layout.n_h})")
    if any(s.uses_base_station for s in schemes):
        if cfg.snapshots < cfg.benchmark.bs_tx:
            return (False, f"scenario.snapshots: BS scanning needs snapshots >= bs_tx "
                           f"({cfg.snapshots} < {cfg.benchmark.bs_tx})")
        try:
            base_station_view(cfg)
        except ValueError as e:
            return (False, f"benchmark.theta_b_deg: {e}")
    return (True, "ok")


def validate_plan(plan, raw=None):
    """
    Comprehensive plan validation.

    Args:
        plan: ExperimentPlan
        raw: Parsed file contents, used to tell explicit keys from defaults

    Returns:
        tuple: (is_valid: bool, reason: str)
    """
    checks = [
        lambda: check_trials(plan.trials),
        lambda: check_sweep(plan.sweep_param, plan.sweep_values, plan.schemes),
        lambda: check_benchmark_geometry(plan.schemes, raw),
        lambda: (plan.crb_mode in CRB_MODES,
                 f"plan.crb: must be one of {', '.join(CRB_MODES)}, got {plan.crb_mode!r}"),
    ]
    for check in checks:
        ok, reason = check()
        if not ok:
            return (False, reason)

    for value in plan.sweep_values:
        try:
            cfg = plan.point_config(value)
        except ValueError as e:
            return (False, f"sweep.values: {value} gives an invalid scene ({e})")
        ok, reason = check_point(cfg, plan.schemes, plan.sweep_param)
        if not ok:
            return (False, reason)

    return (True, "Plan is valid")


def reason_key(reason):
    """The file key a failing reason is about, or None."""
    head = reason.split(":", 1)[0]
    return head if "." in head and " " not in head else None
