"""
experiment.py - Monte Carlo experiment engine
ONE RESPONSIBILITY: Run (scheme, sweep point, trial) tasks and aggregate metrics

Seed splitting: trial i of sweep point j of scheme s draws from
    np.random.SeedSequence(entropy=seed, spawn_key=(s, j, i))
where s is the scheme's position in SchemeId, so any single trial can be
re-run in isolation with run_single_trial.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from analysis import crb
from core import config_manager, constants
from core.config import ScenarioConfig, runtime_config
from core.config_manager import ConfigError
from estimation.metrics import success_and_rmse
from harness.results import ExperimentResult, ResultRow
from harness.schemes import SchemeId, TrialOutcome, build_scheme_channel
from model import reflection
from ui.progress import TrialProgress
from utils import logger
from verification import plan_guard

CHUNK_TRIALS = 50
DEG2_PER_RAD2 = (180.0 / math.pi) ** 2


@dataclass
class ExperimentPlan:
    base: ScenarioConfig
    sweep_param: str
    sweep_values: Tuple[float, ...]
    schemes: Tuple[SchemeId, ...]
    trials: int = 1000
    seed: int = 0
    outputs: Dict[str, str] = field(default_factory=lambda: {"csv": "results.csv"})
    noiseless: bool = False
    crb_mode: str = "deterministic"
    crb_draws: int = 1000

    def __post_init__(self):
        self.sweep_values = tuple(self.sweep_values)
        self.schemes = tuple(self.schemes)

    @classmethod
    def from_file(cls, path, trials: Optional[int] = None, seed: Optional[int] = None) -> "ExperimentPlan":
        """Load and validate a plan file; raises ConfigError naming the offending key."""
        cfg, sections, raw = config_manager.load_plan(path)
        settings, sweep = sections["plan"], sections["sweep"]
        ok, reason = plan_guard.check_schemes(settings["schemes"])
        if not ok:
            raise ConfigError(reason, key=plan_guard.reason_key(reason))
        plan = cls(
            base=cfg,
            sweep_param=sweep["param"],
            sweep_values=tuple(sweep["values"]),
            schemes=tuple(SchemeId.parse(str(name)) for name in settings["schemes"]),
            trials=settings["trials"] if trials is None else trials,
            seed=settings["seed"] if seed is None else seed,
            outputs=dict(sections["outputs"]),
            noiseless=bool(settings["noiseless"]),
            crb_mode=settings["crb"],
            crb_draws=settings["crb_draws"],
        )
        ok, reason = plan_guard.validate_plan(plan, raw)
        if not ok:
            raise ConfigError(reason, key=plan_guard.reason_key(reason))
        return plan

    def point_config(self, value: float) -> ScenarioConfig:
        """Scene at one sweep point; a d_UI sweep leaves the scene unchanged."""
        if self.sweep_param == "tx_power":
            return self.base.with_updates(tx_power=constants.dbm_to_watts(value))
        if self.sweep_param == "M":
            return self.base.with_updates(m=int(value))
        if self.sweep_param == "N":
            return self.base.with_updates(n_h=int(value))
        if self.sweep_param == "d_IT":
            return self.base.with_updates(d_it=float(value))
        if self.sweep_param == "d_UI":
            return self.base
        raise ValueError(f"unknown sweep parameter {self.sweep_param!r}")

    def fixed_user_distance(self, value: float) -> Optional[float]:
        return float(value) if self.sweep_param == "d_UI" else None


def trial_seed(seed: int, scheme: SchemeId, sweep_index: int, trial_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=seed,
                                  spawn_key=(list(SchemeId).index(scheme), sweep_index, trial_index))


def _run_trials(cfg: ScenarioConfig, scheme: SchemeId, d_ui: Optional[float], seed: int,
                sweep_index: int, trial_indices: Sequence[int], noisy: bool):
    """Worker task: one chunk of trials; failures come back as messages."""
    try:
        channel = build_scheme_channel(scheme, cfg, d_ui=d_ui)
    except Exception as e:
        error = f"scheme setup: {type(e).__name__}: {e}"
        return scheme, sweep_index, [(trial_index, None, error) for trial_index in trial_indices]
    outcomes = []
    for trial_index in trial_indices:
        rng = np.random.default_rng(trial_seed(seed, scheme, sweep_index, trial_index))
        try:
            outcomes.append((trial_index, channel.run_trial(rng, noisy), None))
        except Exception as e:
            outcomes.append((trial_index, None, f"{type(e).__name__}: {e}"))
    return scheme, sweep_index, outcomes


def trial_outcomes(plan: ExperimentPlan, scheme: SchemeId, sweep_index: int,
                   trial_indices: Optional[Sequence[int]] = None) -> List[TrialOutcome]:
    """
    Re-run trials of one (scheme, sweep point) serially, in trial order.

    Raises:
        RuntimeError: naming the first trial that failed
    """
    value = plan.sweep_values[sweep_index]
    indices = list(range(plan.trials)) if trial_indices is None else list(trial_indices)
    _, _, outcomes = _run_trials(plan.point_config(value), scheme, plan.fixed_user_distance(value),
                                 plan.seed, sweep_index, indices, not plan.noiseless)
    for trial_index, _, error in outcomes:
        if error is not None:
            raise RuntimeError(f"trial ({scheme.value}, {sweep_index}, {trial_index}) failed: {error}")
    return [outcome for _, outcome, _ in outcomes]


def run_single_trial(plan: ExperimentPlan, scheme: SchemeId, sweep_index: int,
                     trial_index: int) -> TrialOutcome:
    """Re-run one recorded trial in isolation."""
    return trial_outcomes(plan, scheme, sweep_index, [trial_index])[0]


def attached_crb(plan: ExperimentPlan, scheme: SchemeId, cfg: ScenarioConfig) -> float:
    """Closed-form CRB in degrees^2 for PROPOSED; nan for every other scheme."""
    if scheme is not SchemeId.PROPOSED:
        return math.nan
    try:
        schedule = reflection.dft_schedule(cfg.layout.n_h, cfg.snapshots)
        if plan.crb_mode == "fading":
            value = crb.crb_fading_average(cfg, schedule, draws=plan.crb_draws, seed=plan.seed)
        else:
            value = crb.crb_closed_form(cfg, schedule)
    except (ValueError, ArithmeticError) as e:
        logger.log_warning(f"CRB unavailable for {scheme.value}: {e}")
        return math.nan
    return value * DEG2_PER_RAD2


def aggregate(plan: ExperimentPlan, scheme: SchemeId, sweep_index: int,
              outcomes: List[Tuple[int, Optional[TrialOutcome], Optional[str]]]) -> ResultRow:
    """Metrics for one (scheme, sweep point); failed trials count as misses."""
    value = plan.sweep_values[sweep_index]
    cfg = plan.point_config(value)
    completed = [outcome for _, outcome, _ in sorted(outcomes, key=lambda o: o[0]) if outcome is not None]
    failed = plan.trials - len(completed)

    if completed:
        rmse, hit_rate = success_and_rmse([o.theta_hat for o in completed],
                                          [o.truth for o in completed], cfg.success_delta)
        rmse_deg = math.degrees(rmse)
        p_success = hit_rate * len(completed) / plan.trials
        rx_dbm = constants.watts_to_dbm(float(np.mean([o.rx_power for o in completed])))
    else:
        rmse_deg, p_success, rx_dbm = math.nan, 0.0, math.nan

    return ResultRow(
        scheme=scheme.value,
        sweep_param=plan.sweep_param,
        sweep_value=float(value),
        rmse_deg=rmse_deg,
        p_success=p_success,
        mean_rx_power_dbm=rx_dbm,
        crb_deg2=attached_crb(plan, scheme, cfg),
        trials=plan.trials,
        seed=plan.seed,
        failed=failed,
    )


def _tasks(plan: ExperimentPlan):
    noisy = not plan.noiseless
    for scheme in plan.schemes:
        for sweep_index, value in enumerate(plan.sweep_values):
            cfg = plan.point_config(value)
            d_ui = plan.fixed_user_distance(value)
            for start in range(0, plan.trials, CHUNK_TRIALS):
                indices = list(range(start, min(start + CHUNK_TRIALS, plan.trials)))
                yield (cfg, scheme, d_ui, plan.seed, sweep_index, indices, noisy)


def run_experiment(plan: ExperimentPlan, workers: Optional[int] = None,
                   show_progress: bool = False) -> ExperimentResult:
    """
    Run every (scheme, sweep point, trial) of a plan.

    Args:
        plan: Validated plan
        workers: Process count; runtime_config decides when None
        show_progress: Draw a progress bar on the terminal

    Returns:
        ExperimentResult: rows ordered by plan scheme order, then sweep order
    """
    ok, reason = plan_guard.validate_plan(plan)
    if not ok:
        raise ConfigError(reason, key=plan_guard.reason_key(reason))

    workers = workers or runtime_config.worker_count()
    total = len(plan.schemes) * len(plan.sweep_values) * plan.trials
    logger.log_info(f"Experiment start: {len(plan.schemes)} scheme(s) x {len(plan.sweep_values)} "
                    f"point(s) x {plan.trials} trial(s), seed {plan.seed}, {workers} worker(s)")
    progress = TrialProgress("Trials", total, enabled=show_progress)

    collected: Dict[Tuple[SchemeId, int], list] = {}

    def collect(chunk):
        scheme, sweep_index, outcomes = chunk
        collected.setdefault((scheme, sweep_index), []).extend(outcomes)
        for trial_index, _, error in outcomes:
            if error is not None:
                logger.log_error(f"Trial failed: scheme={scheme.value} sweep_index={sweep_index} "
                                 f"trial_index={trial_index} seed={plan.seed}: {error}")
        progress.advance(len(outcomes))

    tasks = list(_tasks(plan))
    if workers <= 1 or len(tasks) <= 1:
        for task in tasks:
            collect(_run_trials(*task))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_trials, *task) for task in tasks]
            for future in futures:
                collect(future.result())

    result = ExperimentResult()
    for scheme in plan.schemes:
        for sweep_index in range(len(plan.sweep_values)):
            result.rows.append(aggregate(plan, scheme, sweep_index, collected.get((scheme, sweep_index), [])))
    failed = sum(row.failed for row in result.rows)
    logger.log_info(f"Experiment finished: {total - failed}/{total} trials completed")
    return result
