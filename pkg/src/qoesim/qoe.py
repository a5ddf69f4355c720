"""User-centric quality-of-experience model.

QoE combines a binary task outcome with a logarithmic waiting-time penalty:
perceived delay cost grows with the *relative* increase of latency over a
reference threshold, so the penalty is sublinear (Weber-Fechner style):

    distortion(L)        = w1 * ln(1 + L / l_th)
    conditional_qoe(c,L) = w2 * q_max - distortion(L)   if c
                         = -distortion(L)               otherwise

Task success itself is the product of independent factors: routing
correctness, tool execution, and network stability.

All functions here are pure; values are immutable and safe to share
across workers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class QoEParams:
    """Per-user / per-topic sensitivity parameters.

    w1: waiting-time sensitivity (>= 0, dimensionless).
    w2: task-satisfaction coefficient (>= 0, dimensionless).
    q_max: satisfaction scale awarded on success (> 0).
    l_th: reference latency threshold in seconds (> 0).
    """

    w1: float
    w2: float
    q_max: float = 1.0
    l_th: float = 2.0

    def __post_init__(self) -> None:
        if self.w1 < 0:
            raise ValueError(f"w1 must be >= 0, got {self.w1}")
        if self.w2 < 0:
            raise ValueError(f"w2 must be >= 0, got {self.w2}")
        if self.q_max <= 0:
            raise ValueError(f"q_max must be > 0, got {self.q_max}")
        if self.l_th <= 0:
            raise ValueError(f"l_th must be > 0, got {self.l_th}")


@dataclass(frozen=True)
class Outcome:
    """One invocation's result: success flag plus latency components.

    End-to-end latency is always the sum of the network and tool parts;
    the components are kept so the harness can attribute delay, but the
    QoE math only consumes the sum.
    """

    success: bool
    t_net: float
    t_tool: float

    def __post_init__(self) -> None:
        if self.t_net < 0:
            raise ValueError(f"t_net must be >= 0, got {self.t_net}")
        if self.t_tool < 0:
            raise ValueError(f"t_tool must be >= 0, got {self.t_tool}")

    @property
    def latency(self) -> float:
        return self.t_net + self.t_tool


@dataclass(frozen=True)
class SuccessFactors:
    """Independent success probabilities: routing, tool execution, network."""

    p_route: float
    p_tool: float
    p_net: float

    def __post_init__(self) -> None:
        for name in ("p_route", "p_tool", "p_net"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")


def distortion(latency: float, params: QoEParams) -> float:
    """Perceived waiting-time penalty w1 * ln(1 + latency / l_th).

    Zero at zero latency, strictly increasing and concave for w1 > 0.
    """
    if latency < 0:
        raise ValueError(f"latency must be >= 0, got {latency}")
    return params.w1 * math.log1p(latency / params.l_th)


def conditional_qoe(outcome: Outcome, params: QoEParams) -> float:
    """QoE of a completed request: success premium minus latency penalty."""
    penalty = distortion(outcome.latency, params)
    if outcome.success:
        return params.w2 * params.q_max - penalty
    return -penalty


def success_probability(factors: SuccessFactors) -> float:
    """Overall success probability: product of the independent factors."""
    return factors.p_route * factors.p_tool * factors.p_net


def basic_qoe(success: bool, q_max: float) -> float:
    """Latency-blind QoE: the full satisfaction scale on success, else 0."""
    return q_max if success else 0.0
