"""
constants.py - Scene defaults, scheme database and unit conversions
ONE RESPONSIBILITY: Store physical defaults and scheme metadata
"""

import math

# Default sensing scene
# Angles are degrees here; conversion to radians happens once in config_manager.
DEFAULT_SCENARIO = {
    "scenario": {
        "d_ci_m": 0.5,
        "d_it_m": 30.0,
        "d_ct_m": None,            # derived from the controller/target geometry when unset
        "d_cs_m": None,            # controller leak distance, defaults to d_ci_m
        "theta_cs_deg": None,      # controller leak angle, defaults to theta_ci_h_deg
        "kappa_dbsm": 7.0,
        "noise_power_dbm": -109.0,
        "tx_power_dbm": 10.0,
        "snapshots": 64,
        "eta_r": 1.0,
        "fading": "rayleigh",
    },
    "array": {
        "n_h": 64,
        "n_v": 1,
        "m": 8,
        "d_i_m": 0.1,
        "d_s_m": 0.1,
        "wavelength_m": 0.2,
    },
    "angles": {
        "theta_deg": 60.0,
        "theta_it_v_deg": 90.0,
        "theta_ci_h_deg": 0.0,
        "theta_ci_v_deg": 90.0,
    },
    "estimation": {
        "success_delta_rad": 0.01,
        "grid_step_deg": 0.01,
        "refine_peak": False,
        "c_index": None,           # 1-based; None selects ceil(N/2)
    },
    "benchmark": {
        "d_bi_m": 100.0,
        "theta_i_deg": 80.0,
        "theta_b_deg": 80.0,
        "bs_tx": 64,
        "bs_rx": 8,
        "bs_spacing_m": 0.1,
        "beam_grid_step_deg": 0.1,
        "mus_range_m": 100.0,
        "mus_min_m": 0.5,
        "theta_ue_deg": 60.0,
    },
}

# Keys that may be given in either of two units; only one of each pair may appear.
ALTERNATE_KEYS = {
    "estimation": {"success_delta_deg": "success_delta_rad"},
}

MUS_RANGES_M = (100.0, 135.0)

# Sensing schemes
# link: echo link chain; receiver: array that forms the snapshots; estimator: DOA method
SCHEME_DATABASE = {
    "PROPOSED": {
        "link": "controller -> IRS elements -> target -> IRS sensors (+ controller -> target -> sensors)",
        "receiver": "irs_sensors",
        "estimator": "music",
        "schedule": "dft",
    },
    "PROPOSED_RANDOM_PHASE": {
        "link": "controller -> IRS elements -> target -> IRS sensors (+ controller -> target -> sensors)",
        "receiver": "irs_sensors",
        "estimator": "music",
        "schedule": "random",
    },
    "BTB": {
        "link": "BS -> target -> BS",
        "receiver": "bs_rx",
        "estimator": "music",
        "schedule": None,
    },
    "BITS": {
        "link": "BS -> IRS elements -> target -> IRS sensors",
        "receiver": "irs_sensors",
        "estimator": "music",
        "schedule": "dft",
    },
    "BTS": {
        "link": "BS -> target -> IRS sensors",
        "receiver": "irs_sensors",
        "estimator": "music",
        "schedule": None,
    },
    "BITIB": {
        "link": "BS -> IRS elements -> target -> IRS elements -> BS",
        "receiver": "bs_rx",
        "estimator": "beam_training",
        "schedule": "codebook",
    },
    "MUS": {
        "link": "mobile user -> IRS elements -> target -> IRS sensors (+ user -> target -> sensors)",
        "receiver": "irs_sensors",
        "estimator": "music",
        "schedule": "dft",
    },
}

SWEEP_PARAMETERS = ("tx_power", "M", "N", "d_IT", "d_UI")


def dbm_to_watts(power_dbm: float) -> float:
    """Convert dBm to watts."""
    return 10.0 ** ((power_dbm - 30.0) / 10.0)


def watts_to_dbm(power_w: float) -> float:
    """
    Convert watts to dBm.

    Returns:
        float: -inf for a zero power
    """
    if power_w <= 0:
        return -math.inf
    return 10.0 * math.log10(power_w) + 30.0


def dbsm_to_m2(rcs_dbsm: float) -> float:
    """Convert a radar cross section from dBsm to square meters."""
    return 10.0 ** (rcs_dbsm / 10.0)


def get_scheme_info(scheme_name: str) -> dict:
    """
    Look up a scheme's link chain and receiver.

    Args:
        scheme_name: Scheme name, case-insensitive (e.g., "bits")

    Returns:
        dict: Scheme metadata, or an empty dict when unknown
    """
    return SCHEME_DATABASE.get(_normalize_scheme_name(scheme_name), {})


def _normalize_scheme_name(scheme_name: str) -> str:
    """Normalize "proposed-random-phase" style names to database keys."""
    return scheme_name.strip().upper().replace("-", "_").replace(" ", "_")
