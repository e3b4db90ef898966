"""Equilibrium pricing: the price moves by the mean expectation each step.

The batch kernel tracks each agent's estimate as a ratio to the current
price and the price itself in log space, so runs with strong drift over
millions of steps neither overflow nor underflow.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .decision import DecisionParams, TraderState, reset_estimate, step_agent
from .seeding import check_seed, derive_seed, make_rng

# elements of the (steps, runs, agents) uniform block held in memory at once
_DRAW_BLOCK = 1 << 22


class MarketCollapse(Exception):
    """Raised when every agent sells at once, which would zero the price."""


@dataclass(frozen=True)
class EquilibriumConfig:
    n_agents: int = 101
    steps: int = 10_000
    params: DecisionParams = field(default_factory=DecisionParams)
    initial_price: float = 100.0
    initial_buyers: int = 51
    seed: int = 0

    def __post_init__(self):
        if self.n_agents < 1 or self.n_agents % 2 == 0:
            raise ValueError(f"n_agents must be odd and positive, got {self.n_agents}")
        if self.steps < 0:
            raise ValueError(f"steps must be >= 0, got {self.steps}")
        if not self.initial_price > 0.0:
            raise ValueError(f"initial_price must be positive, got {self.initial_price}")
        if not 0 <= self.initial_buyers <= self.n_agents:
            raise ValueError(f"initial_buyers must lie in [0, n_agents], got {self.initial_buyers}")
        check_seed(self.seed)


@dataclass
class PriceSeries:
    """Prices on a regular time grid.

    ``log_values`` is the primary representation; ``values`` may hold
    ``inf`` or ``0.0`` when a drifting run leaves the float range.
    """

    t0: int
    dt: float
    log_values: np.ndarray
    collapsed: bool = False

    @classmethod
    def from_prices(cls, values, t0: int = 0, dt: float = 1.0, collapsed: bool = False) -> "PriceSeries":
        values = np.asarray(values, dtype=float)
        if np.any(values <= 0.0):
            raise ValueError("prices must be positive")
        return cls(t0=t0, dt=dt, log_values=np.log(values), collapsed=collapsed)

    @property
    def values(self) -> np.ndarray:
        with np.errstate(over="ignore", under="ignore"):
            return np.exp(self.log_values)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.log_values))

    def __len__(self):
        return len(self.log_values)


@dataclass
class SweepResult:
    """Seed-averaged terminal prices over a parameter grid.

    ``ln_mean_price[i, j]`` is the log of the across-seed mean terminal price
    for ``alpha_grid[i]`` and ``beta_grid[j]``. Collapsed replicates enter
    the mean with terminal price zero.
    """

    alpha_grid: np.ndarray
    beta_grid: np.ndarray
    ln_mean_price: np.ndarray
    n_seeds: int
    n_collapsed: np.ndarray

    @property
    def mean_price(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.ln_mean_price)


def aggregate_return(expectations: Sequence[int]) -> float:
    """Relative price change: the mean of all expectations."""
    m = np.asarray(expectations)
    if m.size == 0 or m.size % 2 == 0:
        raise ValueError(f"need an odd, nonzero number of expectations, got {m.size}")
    if not np.all((m == 1) | (m == -1)):
        raise ValueError("expectations must be -1 or +1")
    return float(m.sum()) / m.size


def initial_states(cfg: EquilibriumConfig) -> list[TraderState]:
    """Agents ``0 .. initial_buyers-1`` start as buyers, the rest as sellers."""
    out = []
    for i in range(cfg.n_agents):
        m = 1 if i < cfg.initial_buyers else -1
        out.append(TraderState(m=m, s=reset_estimate(cfg.initial_price, m)))
    return out


def step_market(states: Sequence[TraderState], price: float, params: DecisionParams,
                rng: np.random.Generator) -> tuple[list[TraderState], float]:
    """Scalar reference step built directly on the decision rule.

    Raises:
        MarketCollapse: if all agents are sellers.
    """
    r = aggregate_return([st.m for st in states])
    if r == -1.0:
        raise MarketCollapse("unanimous sell expectation drives the price to zero")
    new_price = price * (1.0 + r)
    u = rng.random(len(states))
    return [step_agent(st, new_price, params, float(ui)) for st, ui in zip(states, u)], new_price


def _simulate(n_agents: int, steps: int, initial_buyers: int, alpha, beta,
              rngs: Sequence[np.random.Generator], record: bool = False):
    """Vectorised equilibrium dynamics for a batch of independent runs.

    Row ``b`` consumes ``rngs[b]`` in step-major, agent-index order, exactly
    one uniform per agent per step, so a row's result does not depend on the
    rest of the batch.

    Returns:
        (log price increments per run, collapse step per run or -1,
        recorded log-price path of shape (steps+1, runs) when ``record``).
    """
    n_runs = len(rngs)
    alpha = np.broadcast_to(np.asarray(alpha, dtype=float), (n_runs,))[:, None]
    beta = np.broadcast_to(np.asarray(beta, dtype=float), (n_runs,))[:, None]
    keep = 1.0 - alpha

    m = np.full((n_runs, n_agents), -1.0)
    m[:, :initial_buyers] = 1.0
    q = 1.0 + m  # estimate / price
    log_s = np.zeros(n_runs)
    alive = np.ones(n_runs, dtype=bool)
    collapsed_at = np.full(n_runs, -1, dtype=np.int64)
    path = np.empty((steps + 1, n_runs)) if record else None
    if record:
        path[0] = 0.0

    block = max(1, _DRAW_BLOCK // max(1, n_runs * n_agents))
    t = 0
    while t < steps:
        c = min(block, steps - t)
        draws = np.stack([g.random((c, n_agents)) for g in rngs], axis=1)
        for u in draws:
            r = m.sum(axis=1) / n_agents
            dead = alive & (r == -1.0)
            if dead.any():
                collapsed_at[dead] = t
                alive &= ~dead
            g = np.where(alive, 1.0 + r, 1.0)
            log_s += np.where(alive, np.log1p(np.where(alive, r, 0.0)), 0.0)
            # a seller's ratio may overflow to inf in a crash; inf still flips
            with np.errstate(over="ignore", invalid="ignore"):
                q = np.where(keep > 0.0, keep * q / g[:, None], 0.0) + alpha
                mh = m * (q - 1.0)
                w = np.where(mh < 0.0, np.minimum(1.0, -beta * mh), 0.0)
            flip = (u < w) & alive[:, None]
            if flip.any():
                m = np.where(flip, -m, m)
                q = np.where(flip, 1.0 + m, q)
            t += 1
            if record:
                path[t] = log_s
            if not alive.any():
                if record:
                    path = path[: t + 1]
                return log_s, collapsed_at, path
    return log_s, collapsed_at, path


def run_equilibrium(cfg: EquilibriumConfig) -> PriceSeries:
    """Simulate one equilibrium-priced market.

    The returned series has ``steps + 1`` entries, fewer if the run
    collapsed; on collapse the last entry is the final positive price.
    """
    _, collapsed_at, path = _simulate(cfg.n_agents, cfg.steps, cfg.initial_buyers,
                                      cfg.params.alpha, cfg.params.beta,
                                      [make_rng(cfg.seed)], record=True)
    logs = path[:, 0] + np.log(cfg.initial_price)
    collapsed = bool(collapsed_at[0] >= 0)
    if collapsed:
        logs = logs[: collapsed_at[0] + 1]
    return PriceSeries(t0=0, dt=cfg.params.dt, log_values=logs, collapsed=collapsed)


def terminal_log_prices(cfgs: Sequence[EquilibriumConfig]) -> np.ndarray:
    """ln S_T for each config, ``-inf`` where the run collapsed.

    Configs must share ``n_agents``, ``steps`` and ``initial_buyers``.
    """
    c0 = cfgs[0]
    for c in cfgs:
        if (c.n_agents, c.steps, c.initial_buyers) != (c0.n_agents, c0.steps, c0.initial_buyers):
            raise ValueError("batched configs must share n_agents, steps and initial_buyers")
    log_s, collapsed_at, _ = _simulate(
        c0.n_agents, c0.steps, c0.initial_buyers,
        [c.params.alpha for c in cfgs], [c.params.beta for c in cfgs],
        [make_rng(c.seed) for c in cfgs])
    out = log_s + np.log([c.initial_price for c in cfgs])
    out[collapsed_at >= 0] = -np.inf
    return out


def log_mean_exp(log_values: np.ndarray) -> float:
    """ln(mean(exp(x))) without overflow; ``-inf`` entries count as zero."""
    x = np.asarray(log_values, dtype=float)
    top = x.max()
    if not np.isfinite(top):
        return float(top)
    return float(top + np.log(np.mean(np.exp(x - top))))


def sweep_phase_diagram(alpha_grid, beta_grid, seeds: int, base_cfg: EquilibriumConfig,
                        batch_size: int = 2000) -> SweepResult:
    """Seed-averaged terminal price over an (alpha, beta) grid.

    Cell ``(i, j)`` has index ``i * len(beta_grid) + j``; replicate ``k`` of
    that cell runs with ``derive_seed(base_cfg.seed, cell, k)``. Runs are
    batched through the vectorised kernel in any grouping without changing
    the result.
    """
    alpha_grid = np.asarray(alpha_grid, dtype=float)
    beta_grid = np.asarray(beta_grid, dtype=float)
    if alpha_grid.size == 0 or beta_grid.size == 0:
        raise ValueError("grids must be nonempty")
    if seeds < 1:
        raise ValueError(f"seeds must be >= 1, got {seeds}")

    cfgs = []
    for i, a in enumerate(alpha_grid):
        for j, b in enumerate(beta_grid):
            cell = i * beta_grid.size + j
            params = DecisionParams(alpha=float(a), beta=float(b), dt=base_cfg.params.dt)
            for k in range(seeds):
                cfgs.append(EquilibriumConfig(
                    n_agents=base_cfg.n_agents, steps=base_cfg.steps, params=params,
                    initial_price=base_cfg.initial_price, initial_buyers=base_cfg.initial_buyers,
                    seed=derive_seed(base_cfg.seed, cell, k)))

    terminal = np.concatenate([terminal_log_prices(cfgs[i:i + batch_size])
                               for i in range(0, len(cfgs), batch_size)])
    terminal = terminal.reshape(alpha_grid.size, beta_grid.size, seeds)
    ln_mean = np.array([[log_mean_exp(terminal[i, j]) for j in range(beta_grid.size)]
                        for i in range(alpha_grid.size)])
    n_collapsed = np.isneginf(terminal).sum(axis=2)
    return SweepResult(alpha_grid, beta_grid, ln_mean, seeds, n_collapsed)
