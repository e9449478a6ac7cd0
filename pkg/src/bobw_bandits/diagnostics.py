"""Executable checkers for the learner's structural guarantees.

These are empirical falsifiers, not proofs: each check evaluates an
inequality that the analysis guarantees on every run, and reports the
violation count and worst margin over a recorded history or corpus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .scheduler import implicit_exploration


class NoFreeSlot(RuntimeError):
    """Greedy rearrangement found no open slot inside the allowed window.
    This cannot happen on schedules the scheduler produces; firing is a bug
    signal."""


@dataclass
class RunHistory:
    """Per-round artifacts of one scheduler run, recorded by the harness."""

    num_arms: int
    horizon: int
    threshold_const: float
    x: np.ndarray  # (T, K) play distributions, row t-1 is round t
    d_series: np.ndarray  # (T+1,) cumulative outstanding counts, index t
    sigma_hat: np.ndarray  # (T+1,) active outstanding counts, index t
    threshold: np.ndarray  # (T+1,) skipping threshold, index t
    waits: dict[int, int]  # origin round -> waiting time, resolved rounds only
    resolve_time: dict[int, int]  # origin round -> round it arrived or was skipped
    skips: list[tuple[int, int]]  # (skipped origin, round of skip), in order

    @property
    def sigma_hat_max(self) -> int:
        return int(self.sigma_hat.max(initial=0))

    def sigma_hat_running_max(self) -> np.ndarray:
        return np.maximum.accumulate(self.sigma_hat)

    def d_at(self, t: int) -> int:
        """Cumulative outstanding count at round t, frozen past the horizon."""
        return int(self.d_series[min(t, self.horizon)])


@dataclass
class CheckResult:
    name: str
    instances: int
    violations: int
    worst_margin: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        text = (
            f"{self.name}: {status} instances={self.instances} "
            f"violations={self.violations} worst_margin={self.worst_margin:.3e}"
        )
        if self.detail:
            text += f" ({self.detail})"
        return text


@dataclass
class SuiteReport:
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def render(self) -> str:
        return "\n".join(c.line() for c in self.checks)


@dataclass
class RearrangementResult:
    pi: dict[int, int]  # origin round -> new arrival slot
    nu_new: np.ndarray  # slot occupancy, index by round, 0/1
    nu: np.ndarray  # original arrival counts per round
    arrivals: dict[int, int]  # origin round -> original arrival round


def greedy_rearrangement(waits, thresholds=None) -> RearrangementResult:
    """Spread arrivals so that every slot holds at most one.

    ``waits`` maps each origin round s to its waiting time, so the arrival
    lands at s + waits[s].  Arrivals are processed in order of arrival round
    and, within a round, in origin order; each is placed at the earliest
    unoccupied slot at or after its arrival round.  When ``thresholds`` is
    given (indexable by round, the adaptive threshold series), a placement
    beyond round t + floor(threshold[t]) raises NoFreeSlot.
    """
    if not waits:
        return RearrangementResult(pi={}, nu_new=np.zeros(1, dtype=np.int64),
                                   nu=np.zeros(1, dtype=np.int64), arrivals={})
    arrival = {s: s + w for s, w in waits.items()}
    last = max(arrival.values())
    max_round = max(max(waits), last)
    nu = np.zeros(max_round + 2, dtype=np.int64)
    for t in arrival.values():
        nu[t] += 1
    # next_free[r] points at the first possibly-free slot >= r (path-compressed)
    size = last + len(waits) + 2
    next_free = list(range(size + 1))

    def find(r):
        root = r
        while next_free[root] != root:
            root = next_free[root]
        while next_free[r] != root:
            next_free[r], r = root, next_free[r]
        return root

    pi: dict[int, int] = {}
    occupancy = np.zeros(size + 1, dtype=np.int64)
    for s in sorted(waits, key=lambda s: (arrival[s], s)):
        t = arrival[s]
        slot = find(t)
        if thresholds is not None:
            limit_t = min(t, len(thresholds) - 1)
            limit = t + int(math.floor(float(thresholds[limit_t])))
            if slot > limit:
                raise NoFreeSlot(
                    f"arrival of round {s} at {t}: no slot in [{t}, {limit}]"
                )
        pi[s] = slot
        occupancy[slot] = 1
        next_free[slot] = slot + 1
    return RearrangementResult(pi=pi, nu_new=occupancy, nu=nu, arrivals=arrival)


def waiting_sigma_series(waits, horizon: int) -> np.ndarray:
    """Outstanding counts induced by the waiting times:
    sigma_t = #{s <= t : s + waits[s] > t}, for t = 1..horizon (index t)."""
    series = np.zeros(horizon + 1, dtype=np.int64)
    delta = np.zeros(horizon + 2, dtype=np.int64)
    for s, w in waits.items():
        if w > 0 and s <= horizon:
            delta[s] += 1
            delta[min(s + w, horizon + 1)] -= 1
    series[1:] = np.cumsum(delta[1 : horizon + 1])
    return series


def check_rearrangement(result: RearrangementResult, sigma_max_series) -> SuiteReport:
    """Verify occupancy, displacement and zero-slot properties of a
    rearrangement.  ``sigma_max_series`` is the running maximum of the
    outstanding-count series, indexable by round."""
    checks = []
    occ = result.nu_new
    bad_occ = int(np.sum((occ != 0) & (occ != 1)))
    checks.append(CheckResult("occupancy_zero_one", occ.size, bad_occ,
                              float(max(occ.max(initial=0) - 1, 0))))
    conserved = int(occ.sum()) == len(result.pi)
    checks.append(CheckResult("arrival_conservation", 1, 0 if conserved else 1,
                              float(abs(int(occ.sum()) - len(result.pi)))))
    violations = 0
    worst = -math.inf
    last_idx = len(sigma_max_series) - 1
    for s, slot in result.pi.items():
        t = result.arrivals[s]
        bound = float(sigma_max_series[min(t, last_idx)])
        margin = (slot - t) - bound
        if margin > worst:
            worst = margin
        if margin > 0:
            violations += 1
    checks.append(CheckResult("displacement_bound", len(result.pi), violations,
                              worst if violations or result.pi else 0.0))
    horizon = last_idx
    sigma_max_total = float(sigma_max_series[last_idx])
    window = int(horizon + sigma_max_total)
    occupied = int(result.nu_new[1 : window + 1].sum())
    zero_slots = window - occupied
    # rounds that never resolved within the horizon leave holes that are not
    # the rearrangement's doing; with everything resolved the bound is the
    # plain "at most sigma_max zero slots"
    unresolved = max(horizon - len(result.pi), 0)
    margin = zero_slots - sigma_max_total - unresolved
    checks.append(CheckResult("zero_slots", 1, int(margin > 0), float(margin)))
    return SuiteReport(checks)


def check_drift(history: RunHistory, budget: int, rng=None) -> CheckResult:
    """Evaluate x_{t,i} <= 4 max(x_{s,i}, lambda_{s,t}) over valid pairs
    (s, t) with t - s <= threshold_t.  Exhaustive when the pair count fits
    the budget, otherwise uniformly sampled."""
    horizon = history.horizon
    spans = [int(math.floor(float(history.threshold[t]))) for t in range(1, horizon + 1)]
    pairs = []
    total = sum(min(spans[t - 1], t - 1) for t in range(1, horizon + 1))
    if total <= budget:
        for t in range(1, horizon + 1):
            for s in range(max(1, t - spans[t - 1]), t):
                pairs.append((s, t))
    else:
        rng = rng or np.random.default_rng(0)
        while len(pairs) < budget:
            t = int(rng.integers(2, horizon + 1))
            span = min(spans[t - 1], t - 1)
            if span < 1:
                continue
            s = t - int(rng.integers(1, span + 1))
            pairs.append((s, t))
    violations = 0
    worst = -math.inf
    for s, t in pairs:
        lam = implicit_exploration(int(history.d_series[s]), int(history.d_series[t]))
        bound = 4.0 * np.maximum(history.x[s - 1], lam)
        margin = float(np.max(history.x[t - 1] - bound))
        if margin > worst:
            worst = margin
        if margin > 1e-12:
            violations += 1
    return CheckResult("drift_control", len(pairs), violations,
                       worst if pairs else 0.0)


def lambda_sum_report(history: RunHistory) -> tuple[float, int, float]:
    """Sum of the per-round exploration terms lambda_{t,t+w_t} and
    lambda_{t,t+w_t+sigma_max_t}, and its ratio to the peak outstanding
    count.  Cumulative counts are frozen past the horizon."""
    running_max = history.sigma_hat_running_max()
    total = 0.0
    for t, w in history.waits.items():
        d_t = history.d_at(t)
        total += implicit_exploration(d_t, history.d_at(t + w))
        total += implicit_exploration(d_t, history.d_at(t + w + int(running_max[t])))
    smax = history.sigma_hat_max
    ratio = total / smax if smax > 0 else 0.0
    return total, smax, ratio


@dataclass
class SkipMinimizerResult:
    skip_count: int
    value: float
    sqrt_total_delay: float
    sqrt_d_inequality_ok: bool  # sqrt(D) <= min_S(|S| + sqrt(D_rest)) + d_max

    def __iter__(self):
        return iter((self.skip_count, self.value))


def skip_set_minimizer(delays, num_arms: int) -> SkipMinimizerResult:
    """Exact minimizer of |S| + sqrt(D_rest * K^(2/3) log K) over skip sets.

    Skipping the largest delays is optimal: for a fixed skip count the value
    is decreasing in the skipped sum, so only top-m prefixes of the sorted
    delays need to be evaluated.
    """
    delays = np.asarray(delays, dtype=np.int64)
    if np.any(delays < 0):
        raise ValueError("delays must be nonnegative")
    if num_arms < 2:
        raise ValueError("num_arms must be >= 2")
    c = num_arms ** (2.0 / 3.0) * math.log(num_arms)
    total = float(delays.sum())
    top = np.sort(delays)[::-1]
    skipped_sums = np.concatenate(([0.0], np.cumsum(top)))
    counts = np.arange(delays.size + 1)
    values = counts + np.sqrt((total - skipped_sums) * c)
    best = int(np.argmin(values))
    # plain (K-free) version of the same minimization, for the sqrt(D) bound
    plain = counts + np.sqrt(total - skipped_sums)
    ok = math.sqrt(total) <= float(plain.min()) + float(top[0] if top.size else 0.0) + 1e-9
    return SkipMinimizerResult(
        skip_count=best,
        value=float(values[best]),
        sqrt_total_delay=math.sqrt(total),
        sqrt_d_inequality_ok=ok,
    )


def run_invariant_suite(history: RunHistory) -> SuiteReport:
    """Aggregate run-level invariants: one skip per round, doubling of the
    cumulative count over threshold-length windows, the waiting-time budget
    and the skip budget."""
    checks = []
    horizon = history.horizon

    skip_times = [t for _, t in history.skips]
    dup = len(skip_times) - len(set(skip_times))
    checks.append(CheckResult("one_skip_per_round", max(len(skip_times), 1), dup,
                              float(dup), "MultipleSkips" if dup else ""))

    violations = 0
    worst = -math.inf
    for t in range(2, horizon + 1):
        span = int(math.floor(float(history.threshold[t])))
        s = max(1, t - span)
        if s >= t:
            continue
        margin = float(history.d_series[t] - 2 * history.d_series[s])
        worst = max(worst, margin)
        if margin > 0:
            violations += 1
    checks.append(CheckResult("count_doubling", max(horizon - 1, 1), violations,
                              worst if worst > -math.inf else 0.0))

    resolved_wait = np.zeros(horizon + 2)
    for s, w in history.waits.items():
        rt = history.resolve_time.get(s, s + w)
        if rt <= horizon:
            resolved_wait[rt] += w
    cum_wait = np.cumsum(resolved_wait[: horizon + 1])
    margins = cum_wait[1:] - 2.0 * history.d_series[1 : horizon + 1]
    violations = int(np.sum(margins > 0))
    checks.append(CheckResult("waiting_time_budget", horizon, violations,
                              float(margins.max(initial=0.0))))

    if history.skips:
        last_origin, _ = history.skips[-1]
        last_wait = history.waits[last_origin]
        bound = 2.0 * history.threshold_const * last_wait
        margin = len(history.skips) - bound
        checks.append(CheckResult("skip_budget", 1, int(margin > 0), float(margin)))
    else:
        checks.append(CheckResult("skip_budget", 1, 0, 0.0, "no skips"))

    return SuiteReport(checks)
