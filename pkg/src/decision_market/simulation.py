"""Event loop of the order-book market and the alpha_abm sweep."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .agents import (DecisionTraderConfig, RandomTraderConfig, activation_schedule,
                     decision_trader_act, random_trader_act)
from .decision import BUY, SELL, TraderState, reset_estimate
from .equilibrium import PriceSeries, SweepResult, log_mean_exp
from .orderbook import BookSnapshot, OrderBook
from .seeding import check_seed, derive_seed, make_rng


@dataclass(frozen=True)
class OrderBookSimConfig:
    """Order-book market run.

    ``horizon`` counts all simulated seconds including the ``warmup`` seconds
    in which only random traders act; statistics cover ``[warmup, horizon)``.
    """

    horizon: int = 200_000
    warmup: int = 10_000
    initial_price: float = 100.0
    tick_size: float = 0.01
    random_cfg: RandomTraderConfig = field(default_factory=RandomTraderConfig)
    decision_cfg: DecisionTraderConfig = field(default_factory=DecisionTraderConfig)
    snapshot_every: int = 300
    snapshot_depth: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if not 0 <= self.warmup <= self.horizon:
            raise ValueError(f"warmup must lie in [0, horizon], got {self.warmup}")
        if not self.initial_price > 0.0:
            raise ValueError(f"initial_price must be positive, got {self.initial_price}")
        if not self.tick_size > 0.0:
            raise ValueError(f"tick_size must be positive, got {self.tick_size}")
        if self.snapshot_every < 1:
            raise ValueError(f"snapshot_every must be >= 1, got {self.snapshot_every}")
        if self.snapshot_depth < 1:
            raise ValueError(f"snapshot_depth must be >= 1, got {self.snapshot_depth}")
        check_seed(self.seed)

    def baseline(self) -> "OrderBookSimConfig":
        """Same run without decision traders."""
        return replace(self, decision_cfg=replace(self.decision_cfg, count=0, initial_buyers=0))


@dataclass
class SimOutput:
    prices: PriceSeries
    snapshots: list[BookSnapshot]
    imbalance_times: np.ndarray
    imbalance: np.ndarray
    trades: int
    collapsed: bool
    empty_book_seconds: int = 0
    redraws: int = 0
    events: Optional[list] = None

    @property
    def terminal_price(self) -> float:
        return float(self.prices.values[-1])


def _imbalance(book: OrderBook) -> float:
    total = book.bid_volume + book.ask_volume
    if total == 0:
        return 0.0
    return (book.bid_volume - book.ask_volume) / total


def run_orderbook_sim(cfg: OrderBookSimConfig, record_events: bool = False) -> SimOutput:
    """Run the market second by second.

    Each second: activation draws for random traders (and decision traders
    after warm-up), random traders act by index, decision traders act by
    index, expired orders leave the book, then the last trade price is
    recorded (carried forward through seconds without trades). Every
    ``snapshot_every`` recorded seconds a book snapshot and an imbalance
    value are taken.
    """
    rng = make_rng(cfg.seed)
    rcfg, dcfg = cfg.random_cfg, cfg.decision_cfg
    book = OrderBook(cfg.tick_size, record_events=record_events)
    counters: dict = {}
    next_id = 0

    n_rec = cfg.horizon - cfg.warmup
    log_prices = np.empty(n_rec)
    snapshots: list[BookSnapshot] = []
    imb_t: list[int] = []
    imb: list[float] = []
    states: list[TraderState] = []
    trades = 0
    empty_seconds = 0

    for t in range(cfg.horizon):
        live = t >= cfg.warmup
        if live and t == cfg.warmup and dcfg.count:
            p0 = book.last_trade_price or cfg.initial_price
            states = [TraderState(m=(BUY if i < dcfg.initial_buyers else SELL),
                                  s=reset_estimate(p0, BUY if i < dcfg.initial_buyers else SELL),
                                  last_update=t - 1)
                      for i in range(dcfg.count)]

        r_act = activation_schedule(rcfg.count, rcfg.activation_prob, rng, t)
        d_act = activation_schedule(dcfg.count, dcfg.activation_prob, rng, t) if live else ()

        for i in r_act:
            order = random_trader_act(book, rcfg, rng, t, next_id, owner=int(i),
                                      fallback_price=cfg.initial_price, counters=counters)
            next_id += 1
            fills = book.submit_limit(order, t)
            if live:
                trades += len(fills)
        for i in d_act:
            price = book.last_trade_price or cfg.initial_price
            states[i], order = decision_trader_act(states[i], price, dcfg, rng, t, next_id,
                                                   owner=rcfg.count + int(i))
            next_id += 1
            trades += len(book.submit_market(order, t))

        book.expire(t)

        if live:
            k = t - cfg.warmup
            price = book.last_trade_price or cfg.initial_price
            log_prices[k] = math.log(price)
            if not book.bids and not book.asks:
                empty_seconds += 1
            if k % cfg.snapshot_every == 0:
                snapshots.append(book.volume_profile(t, cfg.snapshot_depth))
                imb_t.append(t)
                imb.append(_imbalance(book))

    return SimOutput(
        prices=PriceSeries(t0=cfg.warmup, dt=1.0, log_values=log_prices),
        snapshots=snapshots,
        imbalance_times=np.asarray(imb_t, dtype=np.int64),
        imbalance=np.asarray(imb, dtype=float),
        trades=trades,
        collapsed=n_rec > 0 and trades == 0,
        empty_book_seconds=empty_seconds,
        redraws=counters.get("redraws", 0),
        events=book.events,
    )


def _terminal_log_price(cfg: OrderBookSimConfig) -> tuple[float, bool]:
    out = run_orderbook_sim(cfg)
    if len(out.prices) == 0:
        return math.log(cfg.initial_price), out.collapsed
    return float(out.prices.log_values[-1]), out.collapsed


def sweep_alpha_abm(alpha_values: Sequence[float], seeds: int, base_cfg: OrderBookSimConfig,
                    workers: int = 1) -> SweepResult:
    """Across-seed mean terminal price for each ``alpha_abm``.

    Replicate ``k`` of value ``i`` uses ``derive_seed(base_cfg.seed, i, k)``.
    Runs are independent, so ``workers > 1`` gives identical results.
    """
    alpha_values = np.asarray(alpha_values, dtype=float)
    if alpha_values.size == 0:
        raise ValueError("alpha_values must be nonempty")
    if seeds < 1:
        raise ValueError(f"seeds must be >= 1, got {seeds}")
    cfgs = [replace(base_cfg, seed=derive_seed(base_cfg.seed, i, k),
                    decision_cfg=replace(base_cfg.decision_cfg, alpha_abm=float(a)))
            for i, a in enumerate(alpha_values) for k in range(seeds)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_terminal_log_price, cfgs))
    else:
        results = [_terminal_log_price(c) for c in cfgs]
    logs = np.array([r[0] for r in results]).reshape(alpha_values.size, seeds)
    flags = np.array([r[1] for r in results]).reshape(alpha_values.size, seeds)
    ln_mean = np.array([[log_mean_exp(row)] for row in logs])
    return SweepResult(alpha_values, np.array([base_cfg.decision_cfg.beta]), ln_mean, seeds,
                       flags.sum(axis=1, keepdims=True))
