"""Experiment orchestration: run (algorithm x environment x seeds), compute
pseudo-regret traces at checkpoints, aggregate and write CSV."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .baselines import UcbState, ftrl_no_ix_factory, ucb_delayed_step
from .diagnostics import RunHistory
from .environments import (
    EnvironmentInstance,
    InvalidConfig,
    build_environment,
    loss_at,
)
from .ftrl import NonConvergence, sample_arm
from .scheduler import DelayedBobwScheduler, SchedulerError

ALGORITHMS = ("bobw", "ftrl_no_ix", "ucb_delayed")

CSV_HEADER = "algo,K,T,seed,checkpoint,regret,skips,sigma_hat_max,cum_outstanding"


class MismatchedCheckpoints(ValueError):
    pass


class IoError(OSError):
    pass


def default_checkpoints(horizon: int) -> list[int]:
    """Powers of two up to the horizon, plus the horizon itself."""
    points = []
    p = 1
    while p < horizon:
        points.append(p)
        p *= 2
    points.append(horizon)
    return points


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: str
    num_arms: int
    horizon: int
    loss: dict
    delay: dict
    seeds: tuple[int, ...]
    checkpoints: tuple[int, ...] = ()
    collect_history: bool = False
    verify: bool = False
    env_seed: int = 0
    threshold: object = "default"  # ftrl_no_ix threshold-constant choice
    out: str | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise InvalidConfig(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.num_arms < 2:
            raise InvalidConfig("num_arms must be >= 2")
        if self.horizon < 1:
            raise InvalidConfig("horizon must be >= 1")
        if not self.seeds:
            raise InvalidConfig("at least one seed is required")
        cps = tuple(self.checkpoints) or tuple(default_checkpoints(self.horizon))
        if list(cps) != sorted(cps) or cps[-1] > self.horizon or cps[0] < 1:
            raise InvalidConfig("checkpoints must be sorted and within [1, horizon]")
        object.__setattr__(self, "checkpoints", cps)
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {
            "algorithm", "num_arms", "horizon", "loss", "delay", "seeds",
            "checkpoints", "collect_history", "verify", "env_seed",
            "threshold", "out",
        }
        unknown = set(data) - known
        if unknown:
            raise InvalidConfig(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(
                algorithm=data["algorithm"],
                num_arms=int(data["num_arms"]),
                horizon=int(data["horizon"]),
                loss=dict(data["loss"]),
                delay=dict(data["delay"]),
                seeds=tuple(data["seeds"]),
                checkpoints=tuple(data.get("checkpoints", ())),
                collect_history=bool(data.get("collect_history", False)),
                verify=bool(data.get("verify", False)),
                env_seed=int(data.get("env_seed", 0)),
                threshold=data.get("threshold", "default"),
                out=data.get("out"),
            )
        except KeyError as exc:
            raise InvalidConfig(f"missing config key: {exc}")


@dataclass
class SeedResult:
    seed: int
    checkpoints: tuple[int, ...]
    regret: np.ndarray  # cumulative pseudo-regret at each checkpoint
    skips: int
    sigma_hat_max: int
    cum_outstanding: int
    history: RunHistory | None = None


@dataclass
class RegretTrace:
    config: ExperimentConfig
    results: list[SeedResult]

    def final_regrets(self) -> np.ndarray:
        return np.array([r.regret[-1] for r in self.results])

    def regret_at(self, checkpoint: int) -> np.ndarray:
        idx = self.config.checkpoints.index(checkpoint)
        return np.array([r.regret[idx] for r in self.results])


def _build_env(config: ExperimentConfig) -> EnvironmentInstance:
    return build_environment({
        "num_arms": config.num_arms,
        "horizon": config.horizon,
        "seed": config.env_seed,
        "loss": config.loss,
        "delay": config.delay,
    })


def _run_seed(config: ExperimentConfig, env: EnvironmentInstance, seed: int) -> SeedResult:
    rng = np.random.default_rng([config.env_seed, seed])
    if config.algorithm == "ucb_delayed":
        return _run_seed_ucb(config, env, seed, rng)
    if config.algorithm == "bobw":
        sched = DelayedBobwScheduler(config.num_arms)
    else:
        sched = ftrl_no_ix_factory({"num_arms": config.num_arms,
                                    "threshold": config.threshold})
    horizon, k = config.horizon, config.num_arms
    collect = config.collect_history or config.verify
    adversarial = env.loss.kind == "adversarial"
    if adversarial:
        best_cum = np.minimum.reduce(np.cumsum(env.loss.sequence, axis=0), axis=1)
    played_loss = np.empty(horizon + 1)
    played_x = np.empty((horizon, k))  # needed for delivery lookup and drift checks
    cum = 0.0
    checkpoints = config.checkpoints
    regret = np.empty(len(checkpoints))
    cp_idx = 0
    d_series = np.zeros(horizon + 1, dtype=np.int64) if collect else None
    sigma_series = np.zeros(horizon + 1, dtype=np.int64) if collect else None
    thresh_series = np.zeros(horizon + 1) if collect else None
    resolve_time: dict[int, int] = {}
    skips: list[tuple[int, int]] = []

    def lookup(s):
        return played_x[s - 1]

    try:
        for t in range(1, horizon + 1):
            x = sched.begin_round()
            arm = sample_arm(x, rng)
            sched.record_play(arm)
            played_x[t - 1] = x.probs
            realized = loss_at(env, t, arm, rng)
            played_loss[t] = realized
            arriving = env.arrivals.get(t, ())
            sched.update_counts(arriving)
            sched.deliver(((s, played_loss[s]) for s in arriving), lookup)
            skipped = sched.apply_skipping()
            if skipped is not None:
                skips.append((skipped, t))
                resolve_time[skipped] = t
            for s in arriving:
                resolve_time.setdefault(s, t)
            if collect:
                d_series[t] = sched.cum_outstanding
                sigma_series[t] = sched.sigma_hat
                thresh_series[t] = sched.threshold
            if adversarial:
                cum += realized
            else:
                cum += float(env.loss.gaps[arm])
            while cp_idx < len(checkpoints) and checkpoints[cp_idx] == t:
                regret[cp_idx] = cum - best_cum[t - 1] if adversarial else cum
                cp_idx += 1
    except (SchedulerError, NonConvergence) as exc:
        raise type(exc)(
            f"{exc} [algorithm={config.algorithm} seed={seed} round={sched.t}]"
        ) from exc

    history = None
    if collect:
        waits = {
            rec.round: rec.waited
            for rec in sched.ledger.values()
            if rec.waited is not None
        }
        history = RunHistory(
            num_arms=k,
            horizon=horizon,
            threshold_const=sched.threshold_const,
            x=played_x,
            d_series=d_series,
            sigma_hat=sigma_series,
            threshold=thresh_series,
            waits=waits,
            resolve_time=resolve_time,
            skips=skips,
        )
    return SeedResult(
        seed=seed,
        checkpoints=checkpoints,
        regret=regret,
        skips=sched.skip_count,
        sigma_hat_max=sched.sigma_hat_running_max,
        cum_outstanding=sched.cum_outstanding,
        history=history,
    )


def _run_seed_ucb(config, env, seed, rng) -> SeedResult:
    state = UcbState.fresh(config.num_arms)
    horizon = config.horizon
    adversarial = env.loss.kind == "adversarial"
    if adversarial:
        best_cum = np.minimum.reduce(np.cumsum(env.loss.sequence, axis=0), axis=1)
    played_loss = np.empty(horizon + 1)
    played_arm = np.empty(horizon + 1, dtype=np.int64)
    cum = 0.0
    checkpoints = config.checkpoints
    regret = np.empty(len(checkpoints))
    cp_idx = 0
    for t in range(1, horizon + 1):
        # observations landing at the end of round t-1 are usable at round t
        pending = [(int(played_arm[s]), played_loss[s]) for s in env.arrivals.get(t - 1, ())]
        arm = ucb_delayed_step(state, pending)
        realized = loss_at(env, t, arm, rng)
        played_arm[t] = arm
        played_loss[t] = realized
        if adversarial:
            cum += realized
        else:
            cum += float(env.loss.gaps[arm])
        while cp_idx < len(checkpoints) and checkpoints[cp_idx] == t:
            regret[cp_idx] = cum - best_cum[t - 1] if adversarial else cum
            cp_idx += 1
    return SeedResult(seed=seed, checkpoints=checkpoints, regret=regret,
                      skips=0, sigma_hat_max=0, cum_outstanding=0)


def run_experiment(config: ExperimentConfig, parallel: int = 1) -> RegretTrace:
    """Drive the configured algorithm through the environment once per seed.

    Deterministic given the config: per-seed streams are seeded by
    (env_seed, seed) and results are merged in seed order regardless of
    execution order.
    """
    env = _build_env(config)
    if parallel > 1 and len(config.seeds) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(_run_seed,
                                    [config] * len(config.seeds),
                                    [env] * len(config.seeds),
                                    config.seeds))
    else:
        results = [_run_seed(config, env, seed) for seed in config.seeds]
    results.sort(key=lambda r: r.seed)
    return RegretTrace(config=config, results=results)


def _lower_order_stat(values: np.ndarray, q: float) -> float:
    ordered = np.sort(values)
    return float(ordered[int(q * (len(ordered) - 1))])


@dataclass
class SummaryRow:
    checkpoint: int
    median: float
    q25: float
    q75: float


def aggregate(traces: list[RegretTrace] | RegretTrace) -> list[SummaryRow]:
    """Exact order statistics per checkpoint (lower median, no interpolation)."""
    if isinstance(traces, RegretTrace):
        traces = [traces]
    if not traces:
        raise ValueError("need at least one trace")
    checkpoints = traces[0].config.checkpoints
    for trace in traces:
        if trace.config.checkpoints != checkpoints:
            raise MismatchedCheckpoints(
                f"{trace.config.checkpoints} != {checkpoints}"
            )
    rows = []
    for idx, cp in enumerate(checkpoints):
        values = np.concatenate([[r.regret[idx] for r in t.results] for t in traces])
        rows.append(SummaryRow(
            checkpoint=cp,
            median=_lower_order_stat(values, 0.5),
            q25=_lower_order_stat(values, 0.25),
            q75=_lower_order_stat(values, 0.75),
        ))
    return rows


def write_csv(traces: list[RegretTrace] | RegretTrace, path) -> None:
    """Write raw traces: one row per (seed, checkpoint), reals with six
    significant digits, LF line endings."""
    if isinstance(traces, RegretTrace):
        traces = [traces]
    lines = [CSV_HEADER]
    for trace in traces:
        cfg = trace.config
        for res in trace.results:
            for idx, cp in enumerate(cfg.checkpoints):
                lines.append(
                    f"{cfg.algorithm},{cfg.num_arms},{cfg.horizon},{res.seed},"
                    f"{cp},{res.regret[idx]:.6g},{res.skips},"
                    f"{res.sigma_hat_max},{res.cum_outstanding}"
                )
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(str(exc))
