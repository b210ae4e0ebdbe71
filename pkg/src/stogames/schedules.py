"""Step-size and rate schedules for the discrete and continuous runners.

Discrete runners use a non-increasing step sequence ``alpha_n`` in (0, 1] with
running sums ``sigma_n`` (the payoff-estimate step is ``alpha_n / sigma_n``).
Continuous runners divide the payoff drift by a non-decreasing divisor
``a(t) >= 1`` and move each state's actions at a rate ``beta_s(t)`` in
``[beta_minus, 1]``.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np


class StepSchedule:
    """Payoff-estimate step sequence with cached running sums.

    Presets: ``constant-one`` (alpha_n = 1, sigma_n = n + 1) and ``inv-log``
    (alpha_n = 1/log(n + 2), clamped to 1 at small n).  Custom tables are
    validated for 0 < alpha <= 1 and monotonicity; with those, the bound
    alpha_n / sigma_n <= 1/(n+1) follows and is property-tested.
    """

    def __init__(self, name: str, alpha: Callable[[int], float]):
        self.name = name
        self._alpha = alpha
        self._sums: list[float] = []

    def alpha(self, n: int) -> float:
        return self._alpha(n)

    def sigma(self, n: int) -> float:
        """Running sum of alpha_0 .. alpha_n."""
        while len(self._sums) <= n:
            k = len(self._sums)
            prev = self._sums[-1] if self._sums else 0.0
            self._sums.append(prev + self._alpha(k))
        return self._sums[n]

    def step(self, n: int) -> float:
        """The payoff-estimate step alpha_n / sigma_n."""
        return self._alpha(n) / self.sigma(n)

    def __repr__(self):
        return f"StepSchedule({self.name!r})"


def make_schedule(preset: str, table=None) -> StepSchedule:
    """Build a step schedule from a preset name or an explicit table."""
    if preset == "constant-one":
        return StepSchedule("constant-one", lambda n: 1.0)
    if preset == "inv-log":
        return StepSchedule("inv-log", lambda n: min(1.0, 1.0 / math.log(n + 2)))
    if preset == "custom":
        values = np.asarray(table, dtype=float)
        if values.ndim != 1 or len(values) == 0:
            raise ValueError("custom schedule needs a non-empty 1-d table")
        if np.any(values <= 0) or np.any(values > 1.0):
            raise ValueError("custom schedule values must lie in (0, 1]")
        if np.any(np.diff(values) > 0):
            raise ValueError("custom schedule must be non-increasing")
        frozen = values.copy()

        def alpha(n, _v=frozen):
            return float(_v[min(n, len(_v) - 1)])

        return StepSchedule("custom", alpha)
    raise ValueError(f"unknown schedule preset {preset!r}")


class VisitWeights:
    """Non-decreasing per-visit weight divisor for visit-indexed updates.

    The k-th visit to a state (k counted from 0) carries weight 1/alpha(k).
    ``linear`` (alpha(k) = k + 1) reproduces the slow two-timescale variant;
    expect a double-exponential slowdown relative to ``one``.
    """

    def __init__(self, name: str, alpha: Callable[[int], float]):
        self.name = name
        self.alpha = alpha

    def __repr__(self):
        return f"VisitWeights({self.name!r})"


def make_visit_weights(preset: str, fn: Callable[[int], float] | None = None) -> VisitWeights:
    if preset == "one":
        return VisitWeights("one", lambda k: 1.0)
    if preset == "linear":
        return VisitWeights("linear", lambda k: float(k + 1))
    if preset == "custom":
        if fn is None:
            raise ValueError("custom visit weights need a callable")
        return VisitWeights("custom", fn)
    raise ValueError(f"unknown visit-weight preset {preset!r}")


class DivisorSchedule:
    """Non-decreasing divisor a(t) >= 1 applied to the payoff-estimate drift."""

    def __init__(self, name: str, a: Callable[[float], float],
                 integral_reciprocal: Callable[[float, float], float] | None = None):
        self.name = name
        self._a = a
        self._integral = integral_reciprocal

    def __call__(self, t: float) -> float:
        return self._a(t)

    def integral_reciprocal(self, t0: float, t1: float) -> float:
        """Integral of 1/a over [t0, t1] (closed form for presets)."""
        if self._integral is not None:
            return self._integral(t0, t1)
        ts = np.linspace(t0, t1, 4097)
        return float(np.trapezoid(1.0 / np.array([self._a(t) for t in ts]), ts))

    def __repr__(self):
        return f"DivisorSchedule({self.name!r})"


def make_divisor(preset: str) -> DivisorSchedule:
    if preset == "one":
        return DivisorSchedule("one", lambda t: 1.0, lambda t0, t1: t1 - t0)
    if preset in ("t-plus-1", "t+1"):
        return DivisorSchedule(
            "t-plus-1", lambda t: t + 1.0, lambda t0, t1: math.log((t1 + 1.0) / (t0 + 1.0))
        )
    raise ValueError(f"unknown divisor preset {preset!r}")


class RateSchedule:
    """Per-state update rates beta_s(t) in [beta_minus, 1]."""

    def __init__(self, name: str, beta_minus: float,
                 beta: Callable[[int, float], float]):
        if not (0.0 < beta_minus <= 1.0):
            raise ValueError("beta_minus must lie in (0, 1]")
        self.name = name
        self.beta_minus = beta_minus
        self._beta = beta

    def beta(self, state: int, t: float) -> float:
        return self._beta(state, t)

    def __repr__(self):
        return f"RateSchedule({self.name!r}, beta_minus={self.beta_minus})"


def constant_rates() -> RateSchedule:
    return RateSchedule("constant-one", 1.0, lambda s, t: 1.0)


def piecewise_random_rates(num_states: int, beta_minus: float, seed: int) -> RateSchedule:
    """Rates drawn independently per state on unit intervals, seeded.

    The draw for interval k is a deterministic function of (seed, k), so
    queries at any time are reproducible without storing history.
    """
    cache: dict[int, np.ndarray] = {}

    def beta(s: int, t: float) -> float:
        k = int(math.floor(t))
        if k not in cache:
            rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(k,)))
            cache[k] = rng.uniform(beta_minus, 1.0, size=num_states)
        return float(cache[k][s])

    return RateSchedule("piecewise-random", beta_minus, beta)


def occupancy_rates(game, beta_minus: float, seed: int, smoothing: float = 0.05) -> RateSchedule:
    """Correlated rates from a companion uniform-random play of the game.

    The companion play advances one transition per unit of time; rates are the
    exponentially smoothed state-visit indicators, rescaled by |S| and clipped
    into [beta_minus, 1].  This is the stress preset for correlated
    asynchronicity.
    """
    from .game import sample_transition  # local import to avoid a cycle

    rng = np.random.default_rng(seed)
    occupancy = [np.full(game.num_states, 1.0 / game.num_states)]
    state = [0]

    def extend_to(k: int):
        while len(occupancy) <= k:
            j = int(rng.integers(game.num_joint_actions))
            state[0] = sample_transition(game, state[0], j, rng)
            visit = np.zeros(game.num_states)
            visit[state[0]] = 1.0
            occupancy.append((1 - smoothing) * occupancy[-1] + smoothing * visit)

    def beta(s: int, t: float) -> float:
        k = int(math.floor(t))
        extend_to(k)
        return float(np.clip(game.num_states * occupancy[k][s], beta_minus, 1.0))

    return RateSchedule("occupancy", beta_minus, beta)
