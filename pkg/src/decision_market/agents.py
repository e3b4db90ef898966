"""Trader populations for the order-book market.

Random traders supply liquidity with limit orders scattered around the
same-side best quote. Decision traders follow the decision rule and only
ever send market orders.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .decision import (BUY, TraderState, evolve_estimate_lagged, flip_probability,
                       mispricing, reset_estimate)
from .orderbook import Kind, Order, OrderBook, Side

ANCHORS = ("same_side", "mid")


@dataclass(frozen=True)
class RandomTraderConfig:
    """Liquidity providers.

    ``price_stddev`` is in currency units. ``anchor`` picks the centre of the
    price draw: the same-side best quote or the book midpoint.
    """

    count: int = 400
    activation_prob: float = 1.5e-3
    price_stddev: float = 0.08
    order_volume: int = 1
    lifetime: int = 120
    anchor: str = "same_side"

    def __post_init__(self):
        if self.count < 0:
            raise ValueError(f"count must be >= 0, got {self.count}")
        if not 0.0 < self.activation_prob <= 1.0:
            raise ValueError(f"activation_prob must lie in (0, 1], got {self.activation_prob}")
        if self.price_stddev < 0.0:
            raise ValueError(f"price_stddev must be >= 0, got {self.price_stddev}")
        if self.order_volume < 1:
            raise ValueError(f"order_volume must be >= 1, got {self.order_volume}")
        if self.lifetime < 1:
            raise ValueError(f"lifetime must be >= 1, got {self.lifetime}")
        if self.anchor not in ANCHORS:
            raise ValueError(f"anchor must be one of {ANCHORS}, got {self.anchor!r}")


@dataclass(frozen=True)
class DecisionTraderConfig:
    count: int = 200
    activation_prob: float = 1.5e-3
    alpha_abm: float = 1e-4
    beta: float = 0.5
    order_volume: int = 1
    initial_buyers: int = 180

    def __post_init__(self):
        if self.count < 0:
            raise ValueError(f"count must be >= 0, got {self.count}")
        if not 0.0 < self.activation_prob <= 1.0:
            raise ValueError(f"activation_prob must lie in (0, 1], got {self.activation_prob}")
        if not 0.0 <= self.alpha_abm <= 1.0:
            raise ValueError(f"alpha_abm must lie in [0, 1], got {self.alpha_abm}")
        if self.beta < 0.0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.order_volume < 1:
            raise ValueError(f"order_volume must be >= 1, got {self.order_volume}")
        if not 0 <= self.initial_buyers <= self.count:
            raise ValueError(f"initial_buyers must lie in [0, count], got {self.initial_buyers}")


def activation_schedule(count: int, activation_prob: float, rng: np.random.Generator,
                        now: int = 0) -> np.ndarray:
    """Indices of the agents acting this second, each included independently."""
    if not 0.0 < activation_prob <= 1.0:
        raise ValueError(f"activation_prob must lie in (0, 1], got {activation_prob}")
    return np.flatnonzero(rng.random(count) < activation_prob)


def reference_price(book: OrderBook, side: Side, anchor: str, fallback: float) -> float:
    """Centre of a random trader's price draw, in currency."""
    if anchor == "mid":
        tick = book.mid_tick()
    else:
        tick = book.best_bid() if side is Side.BUY else book.best_ask()
        if tick is None:
            tick = book.last_trade_tick
    return fallback if tick is None else tick * book.tick_size


def random_trader_act(book: OrderBook, cfg: RandomTraderConfig, rng: np.random.Generator,
                      now: int, order_id: int, owner: Optional[int] = None,
                      fallback_price: float = 100.0, counters: Optional[dict] = None) -> Order:
    """Draw a limit order: fair-coin side, then a normal price around the anchor.

    Draws that round to a non-positive tick are redrawn; the number of
    redraws is added to ``counters["redraws"]`` when a dict is given.
    """
    side = Side.BUY if rng.random() < 0.5 else Side.SELL
    centre = reference_price(book, side, cfg.anchor, fallback_price)
    redraws = 0
    while True:
        tick = int(round(rng.normal(centre, cfg.price_stddev) / book.tick_size))
        if tick > 0:
            break
        redraws += 1
    if counters is not None and redraws:
        counters["redraws"] = counters.get("redraws", 0) + redraws
    return Order(id=order_id, side=side, kind=Kind.LIMIT, volume=cfg.order_volume,
                 submit_time=now, price=tick, lifetime=cfg.lifetime, owner=owner)


def decision_trader_act(state: TraderState, last_price: float, cfg: DecisionTraderConfig,
                        rng: np.random.Generator, now: int, order_id: int,
                        owner: Optional[int] = None) -> tuple[TraderState, Order]:
    """Catch up on the seconds since the last activation, test for a flip, trade.

    The estimate is relaxed over the elapsed seconds with the current price
    held fixed. One uniform is drawn for the flip test on every call.
    """
    k = now - state.last_update
    if k < 1:
        raise ValueError(f"activation at {now} does not follow last update at {state.last_update}")
    s = evolve_estimate_lagged(state.s, last_price, cfg.alpha_abm, k)
    h = mispricing(s, last_price)
    m = state.m
    if rng.random() < flip_probability(m, h, cfg.beta):
        m = -m
        s = reset_estimate(last_price, m)
    new_state = replace(state, m=m, s=s, last_update=now)
    side = Side.BUY if m == BUY else Side.SELL
    order = Order(id=order_id, side=side, kind=Kind.MARKET, volume=cfg.order_volume,
                  submit_time=now, owner=owner)
    return new_state, order
