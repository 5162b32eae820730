"""
config_manager.py - Load scenario and plan files
ONE RESPONSIBILITY: Turn TOML files into validated configuration objects
"""

import copy
import math

import toml

from core import constants
from core.config import (AngleSet, ArrayLayout, BenchmarkGeometry, ClutterSpec,
                         ScenarioConfig)

SCENARIO_SECTIONS = ("scenario", "array", "angles", "estimation", "benchmark")
PLAN_SECTIONS = ("plan", "sweep", "outputs")
CLUTTER_KEYS = ("theta_h_deg", "theta_v_deg", "d_i_m", "d_c_m", "kappa_dbsm")

DEFAULT_PLAN = {
    "plan": {
        "schemes": ["PROPOSED"],
        "trials": 1000,
        "seed": 0,
        "noiseless": False,
        "crb": "deterministic",     # or "fading": average over fading draws
        "crb_draws": 1000,
    },
    "sweep": {"param": "tx_power", "values": [10.0]},
    "outputs": {"csv": "results.csv"},
}


class ConfigError(ValueError):
    """Bad configuration; `key` names the offending entry when known."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


def read_toml(path):
    """Read a TOML file, mapping parse and I/O failures to ConfigError."""
    try:
        return toml.load(path)
    except FileNotFoundError:
        raise ConfigError(f"Config file not found: {path}", key=str(path))
    except toml.TomlDecodeError as e:
        raise ConfigError(f"Cannot parse {path}: {e}", key=str(path))


def load_scenario(path):
    """Load a scenario file; defaults fill anything not given.

    Scenario files feed the DFT schedule, so snapshots must be at least n_h.
    """
    data = read_toml(path)
    cfg = scenario_from_dict(data, allowed_sections=SCENARIO_SECTIONS + ("clutter",))
    if cfg.snapshots < cfg.layout.n_h:
        raise ConfigError(f"snapshots must be >= n_h ({cfg.layout.n_h}) for the DFT schedule, "
                          f"got {cfg.snapshots}", key="scenario.snapshots")
    return cfg


def load_plan(path):
    """
    Load a plan file.

    Returns:
        tuple: (ScenarioConfig, plan dict with sections plan/sweep/outputs, raw data)
    """
    data = read_toml(path)
    cfg = scenario_from_dict(
        data, allowed_sections=SCENARIO_SECTIONS + ("clutter",) + PLAN_SECTIONS)
    plan = _merge_with_defaults(DEFAULT_PLAN, {k: data.get(k, {}) for k in PLAN_SECTIONS})
    return cfg, plan, data


def scenario_from_dict(data, allowed_sections=SCENARIO_SECTIONS + ("clutter",)):
    """Validate keys, merge over defaults and convert units."""
    for section in data:
        if section not in allowed_sections:
            raise ConfigError(f"Unknown section [{section}]", key=section)

    raw = {k: v for k, v in data.items() if k in SCENARIO_SECTIONS}
    estimation = dict(raw.get("estimation", {}))
    for alt_key, canonical in constants.ALTERNATE_KEYS["estimation"].items():
        if alt_key in estimation:
            if canonical in estimation:
                raise ConfigError(f"Give only one of {alt_key} and {canonical}",
                                  key=f"estimation.{alt_key}")
            value = estimation.pop(alt_key)
            if not _is_number(value):
                raise ConfigError(f"{alt_key} must be a number, got {value!r}", key=f"estimation.{alt_key}")
            estimation[canonical] = math.radians(value)
    if estimation:
        raw["estimation"] = estimation

    merged = _merge_with_defaults(constants.DEFAULT_SCENARIO, raw)
    _check_types(merged)

    entries = data.get("clutter", [])
    if not isinstance(entries, list):
        raise ConfigError("clutter must be an array of tables ([[clutter]]), not a table", key="clutter")
    clutters = tuple(_clutter_from_dict(entry, i) for i, entry in enumerate(entries))

    try:
        return _build_scenario(merged, clutters)
    except ValueError as e:
        raise ConfigError(str(e), key=_guess_key(str(e), merged))


def _merge_with_defaults(defaults, user):
    merged = copy.deepcopy(defaults)
    for section, values in user.items():
        if not isinstance(values, dict):
            raise ConfigError(f"[{section}] must be a table", key=section)
        for key, value in values.items():
            if key not in merged[section]:
                raise ConfigError(f"Unknown key {section}.{key}", key=f"{section}.{key}")
            merged[section][key] = value
    return merged


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _is_integer(value):
    return isinstance(value, int) and not isinstance(value, bool)


def _check_types(merged):
    """Each value must have the type of its default; unset defaults take numbers."""
    for section, values in merged.items():
        for key, value in values.items():
            default = constants.DEFAULT_SCENARIO[section][key]
            if isinstance(default, bool):
                ok, kind = isinstance(value, bool), "true or false"
            elif isinstance(default, str):
                ok, kind = isinstance(value, str), "a string"
            elif _is_integer(default) or key == "c_index":
                ok, kind = value is None or _is_integer(value), "an integer"
            else:
                ok, kind = value is None or _is_number(value), "a number"
            if not ok:
                raise ConfigError(f"{section}.{key} must be {kind}, got {value!r}", key=f"{section}.{key}")


def _clutter_from_dict(entry, index):
    for key in entry:
        if key not in CLUTTER_KEYS:
            raise ConfigError(f"Unknown key clutter[{index}].{key}", key=f"clutter.{key}")
    for key in CLUTTER_KEYS:
        if key not in entry:
            raise ConfigError(f"Missing key clutter[{index}].{key}", key=f"clutter.{key}")
    try:
        return ClutterSpec(
            theta_h=math.radians(entry["theta_h_deg"]),
            theta_v=math.radians(entry["theta_v_deg"]),
            d_i=float(entry["d_i_m"]),
            d_c=float(entry["d_c_m"]),
            kappa=constants.dbsm_to_m2(entry["kappa_dbsm"]),
        )
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e), key=f"clutter[{index}]")


def _optional_radians(value):
    return None if value is None else math.radians(value)


def _build_scenario(merged, clutters):
    s, a, g, e, b = (merged[k] for k in SCENARIO_SECTIONS)

    layout = ArrayLayout(n_h=a["n_h"], n_v=a["n_v"], m=a["m"], d_i=float(a["d_i_m"]),
                         d_s=float(a["d_s_m"]), wavelength=float(a["wavelength_m"]))
    angles = AngleSet(theta_ci_h=math.radians(g["theta_ci_h_deg"]),
                      theta_ci_v=math.radians(g["theta_ci_v_deg"]),
                      theta_it_h=math.radians(g["theta_deg"]),
                      theta_it_v=math.radians(g["theta_it_v_deg"]))
    benchmark = BenchmarkGeometry(
        d_bi=float(b["d_bi_m"]),
        theta_i=math.radians(b["theta_i_deg"]),
        theta_b=math.radians(b["theta_b_deg"]),
        bs_tx=b["bs_tx"],
        bs_rx=b["bs_rx"],
        bs_spacing=float(b["bs_spacing_m"]),
        beam_grid_step=math.radians(b["beam_grid_step_deg"]),
        mus_range=float(b["mus_range_m"]),
        mus_min=float(b["mus_min_m"]),
        theta_ue=math.radians(b["theta_ue_deg"]),
    )
    return ScenarioConfig(
        layout=layout,
        angles=angles,
        d_ci=float(s["d_ci_m"]),
        d_it=float(s["d_it_m"]),
        d_ct=None if s["d_ct_m"] is None else float(s["d_ct_m"]),
        kappa=constants.dbsm_to_m2(s["kappa_dbsm"]),
        noise_power=constants.dbm_to_watts(s["noise_power_dbm"]),
        tx_power=constants.dbm_to_watts(s["tx_power_dbm"]),
        snapshots=s["snapshots"],
        eta_r=float(s["eta_r"]),
        clutters=clutters,
        success_delta=float(e["success_delta_rad"]),
        grid_step=math.radians(e["grid_step_deg"]),
        refine_peak=bool(e["refine_peak"]),
        c_index=e["c_index"],
        fading=s["fading"],
        d_cs=None if s["d_cs_m"] is None else float(s["d_cs_m"]),
        theta_cs=_optional_radians(s["theta_cs_deg"]),
        benchmark=benchmark,
    )


def _guess_key(message, merged):
    """Map a dataclass validation message back to a file key."""
    field_name = message.split(" ", 1)[0]
    for section, values in merged.items():
        for key in values:
            if key == field_name or key.startswith(field_name + "_"):
                return f"{section}.{key}"
    return None
