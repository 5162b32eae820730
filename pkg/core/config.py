"""
config.py - Scene configuration types and runtime flags
"""

import math
import os
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

HALF_PI = math.pi / 2


def _check_positive(name, value):
    if not value > 0:
        raise ValueError(f"{name} must be strictly positive, got {value}")


def _check_angle(name, value):
    # small slack so that degree conversions of +-90 stay valid
    if not -HALF_PI - 1e-12 <= value <= HALF_PI + 1e-12:
        raise ValueError(f"{name} must lie in [-pi/2, pi/2], got {value}")


@dataclass(frozen=True)
class ArrayLayout:
    """IRS elements (n_h x n_v), horizontal sensors (m) and their spacings."""

    n_h: int = 64
    n_v: int = 1
    m: int = 8
    d_i: float = 0.1
    d_s: float = 0.1
    wavelength: float = 0.2

    def __post_init__(self):
        for name in ("n_h", "n_v", "m"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {value}")
        for name in ("d_i", "d_s", "wavelength"):
            _check_positive(name, getattr(self, name))

    @property
    def n0(self) -> int:
        return self.n_h * self.n_v


@dataclass(frozen=True)
class AngleSet:
    """Controller->IRS angles of arrival and IRS->target angles, radians."""

    theta_ci_h: float = 0.0
    theta_ci_v: float = HALF_PI
    theta_it_h: float = math.radians(60.0)
    theta_it_v: float = HALF_PI

    def __post_init__(self):
        for name in ("theta_ci_h", "theta_ci_v", "theta_it_h", "theta_it_v"):
            _check_angle(name, getattr(self, name))


@dataclass(frozen=True)
class ClutterSpec:
    """One static scatterer: angles seen from the IRS, distances and RCS (m^2)."""

    theta_h: float
    theta_v: float
    d_i: float
    d_c: float
    kappa: float

    def __post_init__(self):
        _check_angle("clutter theta_h", self.theta_h)
        _check_angle("clutter theta_v", self.theta_v)
        _check_positive("clutter d_i", self.d_i)
        _check_positive("clutter d_c", self.d_c)
        if self.kappa < 0:
            raise ValueError(f"clutter kappa must be >= 0, got {self.kappa}")


@dataclass(frozen=True)
class BenchmarkGeometry:
    """Base-station placement and array sizes used by the benchmark schemes."""

    d_bi: float = 100.0
    theta_i: float = math.radians(80.0)
    theta_b: float = math.radians(80.0)
    bs_tx: int = 64
    bs_rx: int = 8
    bs_spacing: float = 0.1
    beam_grid_step: float = math.radians(0.1)
    mus_range: float = 100.0
    mus_min: float = 0.5
    theta_ue: float = math.radians(60.0)

    def __post_init__(self):
        _check_positive("d_bi", self.d_bi)
        _check_angle("theta_i", self.theta_i)
        _check_angle("theta_b", self.theta_b)
        _check_angle("theta_ue", self.theta_ue)
        for name in ("bs_tx", "bs_rx"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("bs_spacing", "beam_grid_step", "mus_min"):
            _check_positive(name, getattr(self, name))
        if self.mus_range <= self.mus_min:
            raise ValueError("mus_range must exceed mus_min")


def derived_distance(d_a: float, d_b: float, angle_between: float) -> float:
    """Law of cosines: distance between two points seen from the IRS at d_a, d_b."""
    squared = d_a ** 2 + d_b ** 2 - 2.0 * d_a * d_b * math.cos(angle_between)
    return math.sqrt(max(squared, 0.0))


@dataclass(frozen=True)
class ScenarioConfig:
    """All physical parameters of one sensing scene, SI units and radians."""

    layout: ArrayLayout = field(default_factory=ArrayLayout)
    angles: AngleSet = field(default_factory=AngleSet)
    d_ci: float = 0.5
    d_it: float = 30.0
    d_ct: Optional[float] = None
    kappa: float = 10.0 ** 0.7
    noise_power: float = 10.0 ** ((-109.0 - 30.0) / 10.0)
    tx_power: float = 10.0 ** ((10.0 - 30.0) / 10.0)
    snapshots: int = 64
    eta_r: float = 1.0
    clutters: Tuple[ClutterSpec, ...] = ()
    success_delta: float = 0.01
    grid_step: float = math.radians(0.01)
    refine_peak: bool = False
    c_index: Optional[int] = None
    fading: str = "rayleigh"
    d_cs: Optional[float] = None
    theta_cs: Optional[float] = None
    benchmark: BenchmarkGeometry = field(default_factory=BenchmarkGeometry)

    def __post_init__(self):
        for name in ("d_ci", "d_it", "noise_power", "tx_power", "eta_r",
                     "success_delta", "grid_step"):
            _check_positive(name, getattr(self, name))
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if int(self.snapshots) != self.snapshots or self.snapshots < 1:
            raise ValueError(f"snapshots must be an integer >= 1, got {self.snapshots}")
        if self.fading not in ("rayleigh", "unit"):
            raise ValueError(f"fading must be 'rayleigh' or 'unit', got {self.fading!r}")
        # frozen dataclass: fill derived geometry through object.__setattr__
        if self.d_ct is None:
            d_ct = derived_distance(self.d_ci, self.d_it,
                                    self.angles.theta_it_h - self.angles.theta_ci_h)
            object.__setattr__(self, "d_ct", d_ct)
        _check_positive("d_ct", self.d_ct)
        if self.d_cs is None:
            object.__setattr__(self, "d_cs", self.d_ci)
        _check_positive("d_cs", self.d_cs)
        if self.theta_cs is None:
            object.__setattr__(self, "theta_cs", self.angles.theta_ci_h)
        _check_angle("theta_cs", self.theta_cs)
        if self.c_index is not None and not 1 <= self.c_index <= self.layout.n_h:
            raise ValueError(f"c_index must lie in [1, {self.layout.n_h}], got {self.c_index}")

    @property
    def theta(self) -> float:
        """Target azimuth seen from the IRS."""
        return self.angles.theta_it_h

    @property
    def eta_amplitude(self) -> float:
        """Amplitude of the vertical factor; eta_r itself enters powers linearly."""
        return math.sqrt(self.eta_r)

    @property
    def noise_var(self) -> float:
        """Noise variance after background cancellation."""
        return 2.0 * self.noise_power

    @property
    def auxiliary_index(self) -> int:
        """1-based position of the nonzero entry of c."""
        if self.c_index is not None:
            return self.c_index
        return math.ceil(self.layout.n_h / 2)

    def with_updates(self, **changes) -> "ScenarioConfig":
        """
        Copy with changes; d_ct is re-derived unless given explicitly.

        Layout fields (n_h, m, ...) and angle fields may be passed directly.
        """
        layout_changes = {k: changes.pop(k) for k in list(changes)
                          if k in ArrayLayout.__dataclass_fields__}
        angle_changes = {k: changes.pop(k) for k in list(changes)
                         if k in AngleSet.__dataclass_fields__}
        if layout_changes:
            changes["layout"] = replace(changes.get("layout", self.layout), **layout_changes)
        if angle_changes:
            changes["angles"] = replace(changes.get("angles", self.angles), **angle_changes)
        geometry_moved = any(k in changes for k in ("d_ci", "d_it", "angles"))
        if geometry_moved and "d_ct" not in changes and self._d_ct_is_derived():
            changes["d_ct"] = None
        return replace(self, **changes)

    def _d_ct_is_derived(self) -> bool:
        derived = derived_distance(self.d_ci, self.d_it,
                                   self.angles.theta_it_h - self.angles.theta_ci_h)
        return math.isclose(self.d_ct, derived, rel_tol=1e-12)


class RuntimeConfig:
    def __init__(self):
        self.debug = False
        self.workers = None
        self.log_dir = os.environ.get("IRS_SENSING_LOG_DIR", "/tmp/irs_sensing_logs")

    def worker_count(self) -> int:
        """CLI flag first, then IRS_SENSING_WORKERS, then the CPU count."""
        if self.workers:
            return max(1, int(self.workers))
        env_value = os.environ.get("IRS_SENSING_WORKERS")
        if env_value:
            return max(1, int(env_value))
        return os.cpu_count() or 1


# Shared by main.py, the logger and the experiment pool
runtime_config = RuntimeConfig()
