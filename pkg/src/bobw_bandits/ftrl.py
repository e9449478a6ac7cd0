"""Per-round FTRL solve over the probability simplex.

The objective is <losses, x> + F(x) with the hybrid regularizer

    F(x) = -2 * eta_inv * sum_i sqrt(x_i) + gamma_inv * sum_i x_i (log x_i - 1),

minimized over the interior of the simplex.  The -sqrt(x) term forces the
minimizer to be strictly positive, so the solve reduces to a monotone
stationarity system: f'(x_i) = -losses_i + mu for a scalar multiplier mu,
with f'(x) = -eta_inv / sqrt(x) + gamma_inv * log(x).  Each coordinate is a
1D root-find (Newton with a guard, bisection fallback) and the outer search
bisects on mu until the coordinates sum to one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SUM_TOL = 1e-10
STATIONARITY_RTOL = 1e-8
# inner root-find works to a tighter residual so the outer sum is reliable
_INNER_RTOL = 1e-13
_OUTER_MAX_ITER = 200
_INNER_MAX_ITER = 100


class NonConvergence(RuntimeError):
    """Iteration budget exhausted; indicates a tolerance or conditioning bug."""


@dataclass(frozen=True)
class RegularizerParams:
    """Learning-rate inverses and arm count for the hybrid regularizer."""

    eta_inv: float
    gamma_inv: float
    num_arms: int

    def __post_init__(self):
        if self.num_arms < 2:
            raise ValueError(f"num_arms must be >= 2, got {self.num_arms}")
        if not (self.eta_inv >= 0 and math.isfinite(self.eta_inv)):
            raise ValueError(f"eta_inv must be finite and >= 0, got {self.eta_inv}")
        if not (self.gamma_inv >= 0 and math.isfinite(self.gamma_inv)):
            raise ValueError(f"gamma_inv must be finite and >= 0, got {self.gamma_inv}")
        if self.eta_inv == 0 and self.gamma_inv == 0:
            raise ValueError("at least one of eta_inv, gamma_inv must be positive")


@dataclass(frozen=True)
class SimplexPoint:
    """Strictly positive probability vector summing to one within 1e-10."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", probs)
        if probs.ndim != 1 or probs.size < 2:
            raise ValueError("probs must be a vector of length >= 2")
        if not np.all(probs > 0):
            raise ValueError("simplex point must be strictly positive")
        if abs(float(probs.sum()) - 1.0) > SUM_TOL:
            raise ValueError(f"probs sum to {probs.sum()!r}, not 1 within {SUM_TOL}")

    def __len__(self):
        return self.probs.size


def regularizer_value(x: SimplexPoint, p: RegularizerParams) -> float:
    """Evaluate F(x).  The negentropy sum is omitted entirely when gamma_inv
    is zero (the entropy penalty is absent, not a 0*inf limit)."""
    probs = x.probs
    value = -2.0 * p.eta_inv * float(np.sum(np.sqrt(probs)))
    if p.gamma_inv > 0:
        value += p.gamma_inv * float(np.sum(probs * (np.log(probs) - 1.0)))
    return value


def _f_prime(x: float, a: float, b: float) -> float:
    # a = eta_inv, b = gamma_inv
    v = 0.0
    if a > 0:
        v -= a / math.sqrt(x)
    if b > 0:
        v += b * math.log(x)
    return v


def _invert_f_prime(a: float, b: float, c: float, x0: float) -> float:
    """Solve f'(x) = c for x in (0, 1], where f'(x) = -a/sqrt(x) + b*log(x).

    f' is strictly increasing and concave on (0, 1], so Newton from below
    converges monotonically; a halving guard keeps iterates positive.  The
    root is clamped to 1 when c >= f'(1).
    """
    if c >= -a:  # f'(1) = -a
        return 1.0
    if a == 0.0:
        return math.exp(c / b)
    tol = _INNER_RTOL * (1.0 + abs(c))
    # pure-Tsallis closed form is an underestimate of the root when b > 0
    x = min(x0, 1.0)
    if not (0.0 < x <= 1.0) or not math.isfinite(x):
        x = (a / -c) ** 2
        if not (0.0 < x <= 1.0):
            x = 0.5
    for _ in range(_INNER_MAX_ITER):
        s = math.sqrt(x)
        fp = -a / s
        if b > 0:
            fp += b * math.log(x)
        diff = c - fp
        if abs(diff) <= tol:
            return x
        deriv = a / (2.0 * x * s)
        if b > 0:
            deriv += b / x
        xn = x + diff / deriv
        if xn <= 0.0:
            xn = x * 0.5
        elif xn > 1.0:
            xn = 0.5 * (x + 1.0)
        if xn == x:
            return x
        x = xn
    # bracketed bisection fallback; f' is monotone so this cannot fail
    lo, hi = 1e-300, 1.0
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if _f_prime(mid, a, b) < c:
            lo = mid
        else:
            hi = mid
        if abs(_f_prime(mid, a, b) - c) <= tol or hi - lo <= 1e-17 * hi:
            return mid
    raise NonConvergence(f"coordinate root-find failed for target {c}")


def solve_ftrl(
    losses,
    p: RegularizerParams,
    mu_hint: float | None = None,
) -> SimplexPoint:
    """Return the unique minimizer of <losses, x> + F(x) over the simplex.

    ``mu_hint`` seeds the outer bisection bracket with the multiplier from a
    previous, similar solve; it only affects speed, never the solution.
    """
    losses = np.asarray(losses, dtype=float)
    if losses.shape != (p.num_arms,):
        raise ValueError(f"losses must have shape ({p.num_arms},)")
    if not np.all(np.isfinite(losses)):
        raise ValueError("losses must be finite")
    loss_list = [float(v) for v in losses]
    lo_loss = min(loss_list)
    hi_loss = max(loss_list)
    k = p.num_arms
    if hi_loss == lo_loss:
        # symmetric objective: uniform is the exact minimizer
        return SimplexPoint(np.full(k, 1.0 / k))

    a, b = p.eta_inv, p.gamma_inv
    xs = [1.0 / k] * k

    def coord_sum(mu: float) -> float:
        total = 0.0
        for i in range(k):
            xs[i] = _invert_f_prime(a, b, mu - loss_list[i], xs[i])
            total += xs[i]
        return total

    if mu_hint is not None and math.isfinite(mu_hint):
        lo, hi = mu_hint - 0.0625, mu_hint + 0.0625
    else:
        lo = lo_loss + _f_prime(1.0 / k, a, b) - 1.0
        hi = hi_loss + _f_prime(1.0, a, b) + 1.0
    width = max(hi - lo, 1.0)
    for _ in range(70):
        if coord_sum(lo) <= 1.0:
            break
        lo -= width
        width *= 2.0
    else:
        raise NonConvergence("could not bracket the multiplier from below")
    width = max(hi - lo, 1.0)
    for _ in range(70):
        if coord_sum(hi) >= 1.0:
            break
        hi += width
        width *= 2.0
    else:
        raise NonConvergence("could not bracket the multiplier from above")

    for _ in range(_OUTER_MAX_ITER):
        mu = 0.5 * (lo + hi)
        total = coord_sum(mu)
        if abs(total - 1.0) <= SUM_TOL:
            probs = np.array(xs)
            if not np.all(probs > 0):
                raise NonConvergence("coordinate underflowed to zero")
            point = SimplexPoint(probs)
            object.__setattr__(point, "_mu", mu)
            return point
        if total < 1.0:
            lo = mu
        else:
            hi = mu
    raise NonConvergence(
        f"outer bisection exhausted {_OUTER_MAX_ITER} steps (|sum-1| > {SUM_TOL})"
    )


def solver_multiplier(x: SimplexPoint) -> float:
    """The Lagrange multiplier recorded by solve_ftrl, for warm starts and
    stationarity checks."""
    return getattr(x, "_mu")


def sample_arm(x: SimplexPoint, rng: np.random.Generator) -> int:
    """Inverse-CDF draw: cumulative scan in index order, strict upper bound."""
    u = rng.random()
    acc = 0.0
    probs = x.probs
    for i in range(probs.size - 1):
        acc += probs[i]
        if u < acc:
            return i
    return probs.size - 1
