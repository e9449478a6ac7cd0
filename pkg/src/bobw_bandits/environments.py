"""Loss models, delay models and the arrival schedule for the simulator.

Environments are immutable after construction and deterministic given their
seed; per-run randomness (Bernoulli draws, arm sampling) lives in per-run
generator streams owned by the harness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class InvalidConfig(ValueError):
    pass


@dataclass(frozen=True)
class LossModel:
    kind: str  # "stochastic" | "adversarial"
    means: np.ndarray | None = None  # Bernoulli means (stochastic)
    sequence: np.ndarray | None = None  # T x K oblivious losses (adversarial)
    gaps: np.ndarray | None = None
    best_arm: int = 0


@dataclass(frozen=True)
class DelayModel:
    kind: str
    realized: np.ndarray  # nonnegative integer delay per round
    d_max: int
    total_delay: int
    sigma_max: int


@dataclass(frozen=True)
class EnvironmentInstance:
    num_arms: int
    horizon: int
    loss: LossModel
    delay: DelayModel
    # arrivals[t] lists origin rounds s with s + d_s = t, for t in 1..T;
    # arrivals past the horizon are dropped (the game ends at T)
    arrivals: dict[int, list[int]]


def _build_loss_model(num_arms, horizon, spec, rng, allow_equal_means=False):
    kind = spec.get("kind")
    if kind == "stochastic":
        means = np.asarray(spec.get("means", ()), dtype=float)
        if means.shape != (num_arms,):
            raise InvalidConfig(f"loss.means must have length {num_arms}")
        if np.any(means < 0) or np.any(means > 1):
            raise InvalidConfig("loss.means must lie in [0, 1]")
        best = int(np.argmin(means))
        gaps = means - means[best]
        if not allow_equal_means and np.sum(gaps == 0) != 1:
            raise InvalidConfig(
                "stochastic loss model requires a unique best arm "
                "(set loss.allow_equal_means to override for zero-gap tests)"
            )
        return LossModel(kind="stochastic", means=means, gaps=gaps, best_arm=best)
    if kind == "adversarial":
        seq = _adversarial_sequence(num_arms, horizon, spec)
        if seq.shape != (horizon, num_arms):
            raise InvalidConfig(f"loss sequence must have shape ({horizon}, {num_arms})")
        if np.any(seq < 0) or np.any(seq > 1):
            raise InvalidConfig("adversarial losses must lie in [0, 1]")
        totals = seq.sum(axis=0)
        return LossModel(kind="adversarial", sequence=seq, best_arm=int(np.argmin(totals)))
    raise InvalidConfig(f"loss.kind must be 'stochastic' or 'adversarial', got {kind!r}")


def _adversarial_sequence(num_arms, horizon, spec):
    if "sequence" in spec:
        return np.asarray(spec["sequence"], dtype=float)
    if "file" in spec:
        return load_loss_file(spec["file"], num_arms, horizon)
    generator = spec.get("generator")
    if generator == "two_phase":
        # arm 0 clearly best in the first half; a mild flip toward arm 1 in
        # the second half keeps arm 0 the best fixed arm overall while
        # forcing the learner to adapt
        seq = np.full((horizon, num_arms), 0.7)
        half = horizon // 2
        seq[:half, 0] = 0.3
        seq[half:, 0] = 0.55
        if num_arms > 1:
            seq[half:, 1] = 0.45
        return seq
    if generator == "constant_gap":
        lo = float(spec.get("lo", 0.4))
        hi = float(spec.get("hi", 0.6))
        seq = np.full((horizon, num_arms), hi)
        seq[:, 0] = lo
        return seq
    if generator == "zeros":
        return np.zeros((horizon, num_arms))
    raise InvalidConfig(f"unknown adversarial generator {spec.get('generator')!r}")


def _build_delays(horizon, spec, rng):
    kind = spec.get("kind")
    if kind == "constant":
        d = int(spec.get("value", 0))
        if d < 0:
            raise InvalidConfig("delay.value must be >= 0")
        realized = np.full(horizon, d, dtype=np.int64)
    elif kind == "uniform_random":
        lo, hi = int(spec.get("lo", 0)), int(spec.get("hi", 0))
        if not 0 <= lo <= hi:
            raise InvalidConfig("delay range requires 0 <= lo <= hi")
        realized = rng.integers(lo, hi + 1, size=horizon)
    elif kind == "outlier_front":
        count = int(spec.get("count", math.isqrt(horizon)))
        magnitude = int(spec.get("magnitude", horizon))
        if count < 0 or count > horizon or magnitude < 0:
            raise InvalidConfig("outlier_front needs 0 <= count <= T and magnitude >= 0")
        realized = np.zeros(horizon, dtype=np.int64)
        realized[:count] = magnitude
    elif kind == "single_outlier":
        magnitude = int(spec.get("magnitude", horizon))
        if magnitude < 0:
            raise InvalidConfig("single_outlier magnitude must be >= 0")
        realized = np.zeros(horizon, dtype=np.int64)
        realized[0] = magnitude
    elif kind == "from_file":
        realized = load_delay_file(spec["file"], horizon)
    else:
        raise InvalidConfig(f"unknown delay.kind {kind!r}")
    return realized.astype(np.int64)


def _sigma_series(realized: np.ndarray) -> np.ndarray:
    """Ground-truth outstanding counts: sigma_t = #{s <= t : s + d_s > t}."""
    horizon = realized.size
    arrival = np.arange(1, horizon + 1) + realized  # s + d_s
    landed = np.bincount(np.clip(arrival, 0, horizon + 1), minlength=horizon + 2)
    cum_landed = np.cumsum(landed)[1 : horizon + 1]  # arrivals with s + d_s <= t
    return np.arange(1, horizon + 1) - cum_landed


def build_environment(config) -> EnvironmentInstance:
    """Build an immutable environment from a config mapping.

    Expected keys: num_arms, horizon, seed, loss (mapping), delay (mapping).
    """
    try:
        num_arms = int(config["num_arms"])
        horizon = int(config["horizon"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidConfig(f"num_arms and horizon are required integers: {exc}")
    if num_arms < 2:
        raise InvalidConfig("num_arms must be >= 2")
    if horizon < 1:
        raise InvalidConfig("horizon must be >= 1")
    seed = config.get("seed", 0)
    rng = np.random.default_rng([int(seed), 0x5EED])
    loss_spec = config.get("loss")
    delay_spec = config.get("delay")
    if not isinstance(loss_spec, dict):
        raise InvalidConfig("loss must be a mapping with a 'kind' key")
    if not isinstance(delay_spec, dict):
        raise InvalidConfig("delay must be a mapping with a 'kind' key")

    loss = _build_loss_model(
        num_arms, horizon, loss_spec, rng,
        allow_equal_means=bool(loss_spec.get("allow_equal_means", False)),
    )
    realized = _build_delays(horizon, delay_spec, rng)
    sigma = _sigma_series(realized)
    delay = DelayModel(
        kind=delay_spec["kind"],
        realized=realized,
        d_max=int(realized.max(initial=0)),
        total_delay=int(realized.sum()),
        sigma_max=int(sigma.max(initial=0)),
    )
    arrivals: dict[int, list[int]] = {}
    for s in range(1, horizon + 1):
        t = s + int(realized[s - 1])
        if t <= horizon:
            arrivals.setdefault(t, []).append(s)
    return EnvironmentInstance(
        num_arms=num_arms, horizon=horizon, loss=loss, delay=delay, arrivals=arrivals
    )


def loss_at(env: EnvironmentInstance, t: int, arm: int, rng: np.random.Generator) -> float:
    """Realized loss for playing ``arm`` at round ``t`` (1-indexed)."""
    if not 1 <= t <= env.horizon:
        raise ValueError(f"round {t} outside horizon {env.horizon}")
    if env.loss.kind == "stochastic":
        return float(rng.random() < env.loss.means[arm])
    return float(env.loss.sequence[t - 1, arm])


def ground_truth_sigma(env: EnvironmentInstance) -> tuple[np.ndarray, int]:
    """The exact outstanding-observation series (pre-skipping ground truth)."""
    series = _sigma_series(env.delay.realized)
    return series, int(series.max(initial=0))


def load_delay_file(path, horizon: int) -> np.ndarray:
    """One nonnegative integer delay per line; line count must equal T."""
    with open(path, encoding="utf-8") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if len(lines) != horizon:
        raise InvalidConfig(f"delay file has {len(lines)} lines, expected {horizon}")
    try:
        realized = np.array([int(line) for line in lines], dtype=np.int64)
    except ValueError as exc:
        raise InvalidConfig(f"delay file: {exc}")
    if np.any(realized < 0):
        raise InvalidConfig("delay file contains negative delays")
    return realized


def load_loss_file(path, num_arms: int, horizon: int) -> np.ndarray:
    """K comma-separated reals in [0,1] per line; line count must equal T."""
    with open(path, encoding="utf-8") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if len(lines) != horizon:
        raise InvalidConfig(f"loss file has {len(lines)} lines, expected {horizon}")
    rows = []
    for lineno, line in enumerate(lines, start=1):
        parts = line.split(",")
        if len(parts) != num_arms:
            raise InvalidConfig(f"loss file line {lineno}: expected {num_arms} values")
        rows.append([float(p) for p in parts])
    return np.asarray(rows, dtype=float)
