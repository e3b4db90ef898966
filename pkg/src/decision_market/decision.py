"""Agent decision model: private price estimates and expectation flips.

Every function here is pure. Randomness enters only through an explicit
uniform draw ``u`` so the caller owns the generator.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

BUY = 1
SELL = -1


def check_expectation(m: int) -> int:
    if m not in (BUY, SELL):
        raise ValueError(f"expectation must be -1 or +1, got {m!r}")
    return m


@dataclass(frozen=True)
class DecisionParams:
    """Parameters of the decision rule.

    Attributes:
        alpha: per-step adjustment rate of the private estimate, in [0, 1].
        beta: inverse tolerance, slope of the flip probability.
        dt: step length in seconds.
    """

    alpha: float = 0.5
    beta: float = 0.5
    dt: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.beta < 0.0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if not self.dt > 0.0:
            raise ValueError(f"dt must be > 0, got {self.dt}")


@dataclass(frozen=True)
class TraderState:
    m: int
    s: float
    last_update: int = 0

    def __post_init__(self):
        check_expectation(self.m)
        if self.s < 0.0:
            raise ValueError(f"estimate must be nonnegative, got {self.s}")


def reset_estimate(price: float, m: int) -> float:
    """Estimate adopted at the moment an agent (re)chooses expectation ``m``.

    A new seller values the asset at zero, a new buyer at twice the price.
    """
    if not price > 0.0:
        raise ValueError(f"price must be positive, got {price}")
    check_expectation(m)
    return price * (1 + m)


def _check_alpha(alpha: float) -> None:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")


def evolve_estimate(s: float, next_price: float, alpha: float) -> float:
    """One relaxation step of the estimate toward the new price."""
    _check_alpha(alpha)
    if not next_price > 0.0:
        raise ValueError(f"price must be positive, got {next_price}")
    return (1.0 - alpha) * s + alpha * next_price


def evolve_estimate_lagged(s: float, current_price: float, alpha: float, k: int) -> float:
    """Closed form of ``k`` relaxation steps with the price held fixed."""
    _check_alpha(alpha)
    if k < 1:
        raise ValueError(f"lag must be >= 1, got {k}")
    if not current_price > 0.0:
        raise ValueError(f"price must be positive, got {current_price}")
    decay = (1.0 - alpha) ** k
    return decay * s + (1.0 - decay) * current_price


def mispricing(s: float, price: float) -> float:
    """Relative deviation of the estimate from the market price."""
    if not price > 0.0:
        raise ValueError(f"price must be positive, got {price}")
    return (s - price) / price


def flip_probability(m: int, h: float, beta: float) -> float:
    """Probability of reversing expectation ``m`` given mispricing ``h``.

    Zero whenever the agent's stance agrees with the mispricing, otherwise
    grows linearly with slope ``beta`` and saturates at one.
    """
    if beta < 0.0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    x = m * h
    if x >= 0.0:
        return 0.0
    return min(1.0, -beta * x)


def step_agent(state: TraderState, next_price: float, params: DecisionParams, u: float) -> TraderState:
    """Advance one agent by one step: evolve, evaluate, maybe flip and reset."""
    s = evolve_estimate(state.s, next_price, params.alpha)
    h = mispricing(s, next_price)
    if u < flip_probability(state.m, h, params.beta):
        m = -state.m
        return replace(state, m=m, s=reset_estimate(next_price, m))
    return replace(state, s=s)
