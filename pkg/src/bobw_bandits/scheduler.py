"""State machine for the delayed-feedback best-of-both-worlds FTRL learner.

One round consists of, in order:

    1. begin_round()            -> play distribution (pure)
    2. record_play(arm)         -> ledger entry for this round
    3. update_counts(arriving)  -> active outstanding count, cumulative count,
                                   skipping threshold
    4. deliver(arrivals, ...)   -> implicit-exploration loss estimates
    5. apply_skipping()         -> at most one skip; advances to next round

The original formulation processes arrivals before counting; here counting
runs first because the exploration terms need the final cumulative count of
the round.  The reorder does not change the count: an observation arriving
at round t has s + d_s = t, which never satisfies s + d_s > t.  Counting
therefore takes the origins arriving this round as an argument so it can
leave them out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ftrl import RegularizerParams, SimplexPoint, solve_ftrl, solver_multiplier

OUTSTANDING = "outstanding"
ARRIVED = "arrived"
SKIPPED = "skipped"


class SchedulerError(RuntimeError):
    pass


class DoublePlay(SchedulerError):
    pass


class UnknownOrigin(SchedulerError):
    pass


class AlreadyResolved(SchedulerError):
    pass


class MultipleSkips(SchedulerError):
    """More than one round qualified for skipping in a single round.  The
    one-skip-at-a-time elimination argument rules this out; raising means an
    implementation bug."""


def implicit_exploration(d_at_play: int, d_now: int) -> float:
    """exp(-d_now / (d_now - d_at_play)), with the limit convention that the
    term is 0 when the counts are equal (exponent -> -inf) or d_now is 0."""
    if d_now < d_at_play or d_at_play < 0:
        raise ValueError("need d_now >= d_at_play >= 0")
    if d_now == 0 or d_now == d_at_play:
        return 0.0
    return math.exp(-d_now / (d_now - d_at_play))


def default_threshold_const(num_arms: int) -> float:
    """The skipping-threshold denominator 49 * K^(2/3) * log K."""
    return 49.0 * num_arms ** (2.0 / 3.0) * math.log(num_arms)


@dataclass
class RoundRecord:
    round: int
    arm: int
    d_snapshot: int = -1  # cumulative outstanding count at end of this round's accounting
    delay: int | None = None  # revealed on arrival
    waited: int | None = None  # set on arrival or skip
    status: str = OUTSTANDING


class DelayedBobwScheduler:
    """Algorithm state: cumulative loss estimates, skip set, outstanding
    accounting and the adaptive skipping threshold.

    A scheduler instance is single-threaded; no operation may be invoked
    reentrantly.  ``ix_enabled=False`` forces the implicit-exploration terms
    to zero (the no-IX ancestor baseline); ``threshold_const`` overrides the
    skipping-threshold denominator.
    """

    def __init__(
        self,
        num_arms: int,
        ix_enabled: bool = True,
        threshold_const: float | None = None,
    ):
        if num_arms < 2:
            raise ValueError("num_arms must be >= 2 (log K would vanish at K=1)")
        self.num_arms = num_arms
        self.ix_enabled = ix_enabled
        self.threshold_const = (
            default_threshold_const(num_arms) if threshold_const is None else float(threshold_const)
        )
        if self.threshold_const <= 0:
            raise ValueError("threshold_const must be positive")
        self._log_k = math.log(num_arms)

        self.t = 1
        self.cum_loss_est = np.zeros(num_arms)
        self.skip_set: set[int] = set()
        self.cum_outstanding = 0  # D_t
        self.sigma_hat = 0
        self.sigma_hat_running_max = 0
        self.threshold = 0.0
        self.skip_count = 0
        self.ledger: dict[int, RoundRecord] = {}

        self._outstanding: set[int] = set()
        self._phase = "play"  # play -> counted -> delivered
        self._mu_hint: float | None = None

    # -- round steps ------------------------------------------------------

    def round_params(self) -> RegularizerParams:
        """Learning rates for the current round: eta_inv = sqrt(t) and
        gamma_inv from the latest cumulative count available before playing."""
        return RegularizerParams(
            eta_inv=math.sqrt(self.t),
            gamma_inv=math.sqrt(49.0 * self.cum_outstanding / self._log_k),
            num_arms=self.num_arms,
        )

    def begin_round(self, params: RegularizerParams | None = None) -> SimplexPoint:
        """Solve for the play distribution of the current round.  Pure: the
        state is unchanged and repeated calls return the same point."""
        if params is None:
            params = self.round_params()
        x = solve_ftrl(self.cum_loss_est, params, mu_hint=self._mu_hint)
        try:
            self._mu_hint = solver_multiplier(x)
        except AttributeError:
            pass
        return x

    def record_play(self, arm: int) -> None:
        if self._phase != "play":
            raise SchedulerError("record_play out of order")
        if self.t in self.ledger:
            raise DoublePlay(f"round {self.t} already played")
        if not 0 <= arm < self.num_arms:
            raise ValueError(f"arm {arm} out of range [0, {self.num_arms})")
        self.ledger[self.t] = RoundRecord(round=self.t, arm=arm)
        self._outstanding.add(self.t)

    def update_counts(self, arriving=()) -> tuple[int, int, float]:
        """Count active outstanding observations and grow the threshold.

        ``arriving`` lists the origin rounds whose observations land this
        round; they have s + d_s = t and therefore do not count as
        outstanding, even though deliver() has not yet flipped their status.
        """
        if self._phase != "play":
            raise SchedulerError("update_counts before record_play")
        if self.t not in self.ledger:
            raise SchedulerError("update_counts before record_play")
        t = self.t
        sigma = len(self._outstanding) - 1  # exclude this round's own record
        for s in arriving:
            if s != t and s in self._outstanding:
                sigma -= 1
        self.sigma_hat = sigma
        self.cum_outstanding += sigma
        if sigma > self.sigma_hat_running_max:
            self.sigma_hat_running_max = sigma
        self.threshold = math.sqrt(self.cum_outstanding / self.threshold_const)
        self.ledger[t].d_snapshot = self.cum_outstanding
        self._phase = "counted"
        return self.sigma_hat, self.cum_outstanding, self.threshold

    def deliver(self, arrivals, x_origin_lookup) -> None:
        """Fold arriving observations into the cumulative loss estimates.

        ``arrivals`` is an iterable of (origin round s, loss in [0,1]);
        ``x_origin_lookup`` maps an origin round to the distribution that was
        played there.  Arrivals from already-skipped rounds are discarded
        silently (they count as empty arrivals).
        """
        if self._phase != "counted":
            raise SchedulerError("deliver before update_counts")
        t = self.t
        for s, loss in arrivals:
            record = self.ledger.get(s)
            if record is None:
                raise UnknownOrigin(f"no ledger record for round {s}")
            if record.status == SKIPPED:
                continue
            if record.status != OUTSTANDING:
                raise AlreadyResolved(f"round {s} already {record.status}")
            if not 0.0 <= loss <= 1.0:
                raise ValueError(f"loss {loss} outside [0, 1]")
            if self.ix_enabled:
                lam = implicit_exploration(record.d_snapshot, self.cum_outstanding)
            else:
                lam = 0.0
            x_s = x_origin_lookup(s)
            probs = x_s.probs if isinstance(x_s, SimplexPoint) else np.asarray(x_s)
            denom = max(float(probs[record.arm]), lam)
            self.cum_loss_est[record.arm] += loss / denom
            record.status = ARRIVED
            record.delay = t - s
            record.waited = t - s
            self._outstanding.discard(s)
        self._phase = "delivered"

    def apply_skipping(self) -> int | None:
        """Skip the (at most one) outstanding round whose waiting time has
        reached the threshold, then advance to the next round."""
        if self._phase != "delivered":
            raise SchedulerError("apply_skipping before deliver")
        t = self.t
        qualifying = [
            s for s in self._outstanding if s <= t - 1 and (t - s) >= self.threshold
        ]
        if len(qualifying) > 1:
            raise MultipleSkips(f"rounds {sorted(qualifying)} all qualify at t={t}")
        skipped = None
        if qualifying:
            skipped = qualifying[0]
            record = self.ledger[skipped]
            record.status = SKIPPED
            record.waited = t - skipped
            self.skip_set.add(skipped)
            self.skip_count += 1
            self._outstanding.discard(skipped)
        self.t += 1
        self._phase = "play"
        return skipped
