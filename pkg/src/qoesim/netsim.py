"""Synthetic network latency, failure realization, and EWMA prediction.

Each server is bound to a named latency pattern; the value at a given time
step is a pure function of (pattern, step, seed), so traces are identical
no matter how many other samples were drawn in between. Patterns:

  good_to_bad_jitter   low start ramping to base*(1+growth), noise widening
  bad_to_good_stable   high plateau with seeded spikes, then calm baseline
  stable_fluctuating   baseline plus a sine wave plus noise
  stable_high          configured (elevated) baseline plus noise
  stable_normal        baseline plus noise
  smooth_scaled        baseline times a fixed per-server factor plus noise

The elevated level of stable_high lives in its configured base_latency
(scenario builders use 5x the topic baseline); the sampler itself treats
it like any flat level.

Failure realization composes a hard execution timeout with a network
survival term exp(-latency/tau_net) * stability, so slow links are also
the flaky ones.

The latency predictor keeps a sliding window of recent samples plus a
running exponentially weighted average, and forecasts
alpha * newest_sample + (1 - alpha) * running_average.
"""
from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field

from .qoe import Outcome
from .seeding import derived_rng

MIN_LATENCY_S = 0.001

PATTERN_KINDS = (
    "good_to_bad_jitter",
    "bad_to_good_stable",
    "stable_fluctuating",
    "stable_high",
    "stable_normal",
    "smooth_scaled",
)

# Jittery transitions fail more; calm patterns barely ever.
DEFAULT_STABILITY = {
    "good_to_bad_jitter": 0.95,
    "bad_to_good_stable": 0.95,
    "stable_fluctuating": 0.99,
    "stable_high": 0.99,
    "stable_normal": 0.99,
    "smooth_scaled": 0.99,
}


class ColdStartError(Exception):
    """predict() was called before any sample was observed."""


@dataclass(frozen=True)
class LatencyPattern:
    kind: str
    base_latency: float
    scale: float = 1.0
    variance: float = 0.0
    amplitude: float = 0.0
    period: float = 20.0
    phase: float = 0.0
    transition_point: float = 0.5
    growth: float = 3.0
    bad_factor: float = 4.0
    spike_prob: float = 0.15
    spike_scale: float = 2.0

    def __post_init__(self) -> None:
        if self.kind not in PATTERN_KINDS:
            raise ValueError(f"unknown latency pattern kind {self.kind!r}")
        if self.base_latency <= 0:
            raise ValueError(f"base_latency must be > 0, got {self.base_latency}")
        if self.variance < 0:
            raise ValueError(f"variance must be >= 0, got {self.variance}")
        if self.kind in ("good_to_bad_jitter", "bad_to_good_stable") and not (
            0.0 < self.transition_point < 1.0
        ):
            raise ValueError(
                f"transition_point must be in (0, 1), got {self.transition_point}"
            )


def sample_latency(pattern: LatencyPattern, time_index: int, horizon: int, rng: random.Random) -> float:
    """One latency draw for the pattern at the given step; >= 1 ms always."""
    if not 0 <= time_index < horizon:
        raise ValueError(f"time_index {time_index} outside [0, {horizon})")
    progress = time_index / max(horizon - 1, 1)
    base = pattern.base_latency
    sigma = math.sqrt(pattern.variance)
    kind = pattern.kind
    if kind == "good_to_bad_jitter":
        value = base * (1.0 + pattern.growth * progress)
        noise_sigma = sigma * progress
    elif kind == "bad_to_good_stable":
        if progress < pattern.transition_point:
            value = base * pattern.bad_factor
            if rng.random() < pattern.spike_prob:
                value += base * pattern.spike_scale
            noise_sigma = sigma
        else:
            value = base
            noise_sigma = sigma * 0.25
    elif kind == "stable_fluctuating":
        value = base + pattern.amplitude * math.sin(
            2.0 * math.pi * time_index / pattern.period + pattern.phase
        )
        noise_sigma = sigma
    elif kind in ("stable_high", "stable_normal"):
        value = base
        noise_sigma = sigma
    else:  # smooth_scaled
        value = base * pattern.scale
        noise_sigma = sigma
    if noise_sigma > 0:
        # noise is bounded at 4 sigma; rare large events are modeled
        # explicitly (spikes, ramps), not through gaussian tails
        noise = rng.gauss(0.0, noise_sigma)
        limit = 4.0 * noise_sigma
        value += min(limit, max(-limit, noise))
    return max(value, MIN_LATENCY_S)


def latency_trace(pattern: LatencyPattern, horizon: int, seed: object, key: str = "") -> list[float]:
    """The full per-step trace; each step uses its own derived RNG stream."""
    return [
        sample_latency(pattern, t, horizon, derived_rng(seed, "net", key, t))
        for t in range(horizon)
    ]


@dataclass(frozen=True)
class NetworkState:
    """Snapshot of the network at one step: realized latency and stability
    per tool (tools inherit their server's pattern draw)."""

    time_index: int
    latency_s: dict[str, float] = field(default_factory=dict)
    stability: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.time_index < 0:
            raise ValueError(f"time_index must be >= 0, got {self.time_index}")
        for tool_id, value in self.latency_s.items():
            if value <= 0:
                raise ValueError(f"latency for {tool_id!r} must be > 0, got {value}")
        for tool_id, value in self.stability.items():
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"stability for {tool_id!r} must be in [0, 1], got {value}")


@dataclass
class EwmaState:
    """Sliding window of recent samples plus the running long-term average."""

    alpha: float = 0.3
    window_size: int = 10
    window: deque[float] = field(default_factory=deque)
    historical: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.window_size < 1:
            raise ValueError(f"window_size must be >= 1, got {self.window_size}")

    def observe(self, sample: float) -> None:
        """Fold one measurement in: append to the window, update the average."""
        if sample <= 0:
            raise ValueError(f"latency sample must be > 0, got {sample}")
        self.window.append(sample)
        while len(self.window) > self.window_size:
            self.window.popleft()
        if self.historical is None:
            self.historical = sample
        else:
            self.historical = self.alpha * sample + (1.0 - self.alpha) * self.historical

    def predict(self) -> float:
        """alpha-blend of the newest sample and the running average."""
        if self.historical is None or not self.window:
            raise ColdStartError("no latency samples observed yet")
        return self.alpha * self.window[-1] + (1.0 - self.alpha) * self.historical


@dataclass(frozen=True)
class FailureModel:
    """Execution timeout plus latency-coupled network survival."""

    timeout_s: float = 30.0
    tau_net_s: float = 60.0

    def p_tool(self, latency: float) -> float:
        return 1.0 if latency <= self.timeout_s else 0.0

    def p_net(self, latency: float, stability: float) -> float:
        return math.exp(-latency / self.tau_net_s) * stability


@dataclass(frozen=True)
class ToolBinding:
    """Everything needed to realize one tool invocation."""

    tool_id: str
    server_id: str
    pattern: LatencyPattern
    stability: float = 0.99
    exec_median_s: float = 0.2
    exec_sigma: float = 0.25


def sample_exec_time(binding: ToolBinding, rng: random.Random) -> float:
    """Tool execution time: lognormal around the configured median."""
    return rng.lognormvariate(math.log(binding.exec_median_s), binding.exec_sigma)


def invoke(
    tool_id: str,
    state: NetworkState,
    binding: ToolBinding,
    failure: FailureModel,
    rng: random.Random,
) -> Outcome:
    """Realize one invocation against the step's network snapshot.

    The success flag covers execution and network survival only; routing
    correctness is the caller's observation, not a random draw. No global
    state advances here; the caller owns the clock.
    """
    if tool_id not in state.latency_s:
        raise KeyError(f"tool {tool_id!r} has no latency in this snapshot")
    t_net = state.latency_s[tool_id]
    stability = state.stability.get(tool_id, binding.stability)
    t_tool = sample_exec_time(binding, rng)
    latency = t_net + t_tool
    p_ok = failure.p_tool(latency) * failure.p_net(latency, stability)
    success = rng.random() < p_ok
    return Outcome(success=success, t_net=t_net, t_tool=t_tool)
