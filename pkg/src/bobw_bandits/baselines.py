"""Reference algorithms: queued-update UCB1 for the stochastic regime and
the no-implicit-exploration FTRL ancestor for the adversarial regime."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .environments import InvalidConfig
from .scheduler import DelayedBobwScheduler, default_threshold_const


@dataclass
class UcbState:
    """Arrived-observation counts and empirical means, loss convention."""

    counts: np.ndarray
    means: np.ndarray
    plays: np.ndarray
    t: int = 0

    @classmethod
    def fresh(cls, num_arms: int) -> "UcbState":
        return cls(
            counts=np.zeros(num_arms, dtype=np.int64),
            means=np.zeros(num_arms),
            plays=np.zeros(num_arms, dtype=np.int64),
        )


def ucb_delayed_step(state: UcbState, arrivals) -> int:
    """Fold this round's arrivals into the empirical means, then play the arm
    with the lowest optimistic loss index mean - sqrt(2 log t / n).

    Arms without any arrived observation are played first, least-played
    first (ties by index), so outstanding feedback forces round-robin
    exploration instead of hammering one arm.
    """
    for arm, loss in arrivals:
        n = state.counts[arm] + 1
        state.counts[arm] = n
        state.means[arm] += (loss - state.means[arm]) / n
    state.t += 1
    unobserved = np.flatnonzero(state.counts == 0)
    if unobserved.size:
        arm = int(unobserved[np.argmin(state.plays[unobserved])])
    else:
        radius = np.sqrt(2.0 * math.log(state.t) / state.counts)
        arm = int(np.argmin(state.means - radius))
    state.plays[arm] += 1
    return arm


def ftrl_no_ix_factory(config) -> DelayedBobwScheduler:
    """Scheduler variant with the exploration terms forced to zero and a
    swappable skipping-threshold constant.

    ``config`` keys: num_arms (required); threshold ("default" for
    49 K^(2/3) log K, "plain_log_k" for log K, or a positive number).
    """
    try:
        num_arms = int(config["num_arms"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidConfig(f"num_arms is required: {exc}")
    if num_arms < 2:
        raise InvalidConfig("num_arms must be >= 2")
    choice = config.get("threshold", "default")
    if choice == "default":
        const = default_threshold_const(num_arms)
    elif choice == "plain_log_k":
        const = math.log(num_arms)
    else:
        try:
            const = float(choice)
        except (TypeError, ValueError):
            raise InvalidConfig(f"unrecognized threshold {choice!r}")
        if const <= 0:
            raise InvalidConfig("threshold constant must be positive")
    return DelayedBobwScheduler(num_arms, ix_enabled=False, threshold_const=const)
