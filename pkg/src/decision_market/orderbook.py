"""Double-auction limit order book with price-time priority.

Prices are integer tick counts; ``tick_size`` converts to currency. Limit
orders carry a lifetime and leave the book through ``expire``. Market
orders never rest: any volume the opposite side cannot absorb is dropped.
"""
from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from sortedcontainers import SortedDict


class Side(str, Enum):
    BUY = "buy"
    SELL = "sell"

    @property
    def opposite(self) -> "Side":
        return Side.SELL if self is Side.BUY else Side.BUY


class Kind(str, Enum):
    LIMIT = "limit"
    MARKET = "market"


@dataclass(slots=True)
class Order:
    id: int
    side: Side
    kind: Kind
    volume: int
    submit_time: int
    price: Optional[int] = None
    lifetime: Optional[int] = None
    owner: Optional[int] = None

    def __post_init__(self):
        if self.volume < 1:
            raise ValueError(f"order volume must be >= 1, got {self.volume}")
        if self.kind is Kind.LIMIT:
            if self.price is None or self.lifetime is None:
                raise ValueError("limit orders need a price and a lifetime")
            if self.lifetime < 1:
                raise ValueError(f"lifetime must be >= 1, got {self.lifetime}")
        elif self.price is not None or self.lifetime is not None:
            raise ValueError("market orders carry no price and no lifetime")

    @property
    def expiry(self) -> int:
        return self.submit_time + self.lifetime


@dataclass(frozen=True, slots=True)
class Trade:
    price_tick: int
    price: float
    volume: int
    time: int
    maker_order_id: int
    taker_order_id: int


@dataclass(frozen=True)
class BookSnapshot:
    """Aggregate resting volume per price level, sorted by price."""

    time: int
    levels: tuple[tuple[int, Side, int], ...]

    @property
    def bid_volume(self) -> int:
        return sum(v for _, side, v in self.levels if side is Side.BUY)

    @property
    def ask_volume(self) -> int:
        return sum(v for _, side, v in self.levels if side is Side.SELL)


class _Level:
    __slots__ = ("orders", "volume")

    def __init__(self):
        self.orders: deque[Order] = deque()
        self.volume = 0


class OrderBook:
    """Central limit order book for one asset.

    Args:
        tick_size: currency value of one price tick.
        record_events: keep an append-only list of
            ``(time, event, side, price_tick, volume, order_id)`` tuples.
    """

    def __init__(self, tick_size: float = 0.01, record_events: bool = False):
        if not tick_size > 0.0:
            raise ValueError(f"tick_size must be positive, got {tick_size}")
        self.tick_size = tick_size
        self.bids: SortedDict = SortedDict()
        self.asks: SortedDict = SortedDict()
        self.bid_volume = 0
        self.ask_volume = 0
        self.last_trade_tick: Optional[int] = None
        self.events: Optional[list] = [] if record_events else None
        self._resting: dict[int, Order] = {}
        self._seen: set[int] = set()
        self._expiry: list[tuple[int, int]] = []

    # -- queries ---------------------------------------------------------

    @property
    def last_trade_price(self) -> Optional[float]:
        if self.last_trade_tick is None:
            return None
        return self.last_trade_tick * self.tick_size

    def best_bid(self) -> Optional[int]:
        return self.bids.peekitem(-1)[0] if self.bids else None

    def best_ask(self) -> Optional[int]:
        return self.asks.peekitem(0)[0] if self.asks else None

    def spread(self) -> Optional[int]:
        if not self.bids or not self.asks:
            return None
        return self.best_ask() - self.best_bid()

    def total_volume(self) -> int:
        return self.bid_volume + self.ask_volume

    def resting_orders(self) -> list[Order]:
        """Resting orders in (side, price priority, time priority) order."""
        out = []
        for tick in reversed(self.bids):
            out.extend(self.bids[tick].orders)
        for tick in self.asks:
            out.extend(self.asks[tick].orders)
        return out

    def level_volumes(self, side: Side) -> dict[int, int]:
        levels = self.bids if side is Side.BUY else self.asks
        return {tick: lvl.volume for tick, lvl in levels.items()}

    def __len__(self):
        return len(self._resting)

    # -- order entry -----------------------------------------------------

    def _register(self, order: Order) -> None:
        if order.id in self._seen:
            raise ValueError(f"duplicate order id {order.id}")
        self._seen.add(order.id)

    def _log(self, *record) -> None:
        if self.events is not None:
            self.events.append(record)

    def _match(self, taker: Order, volume: int, limit: Optional[int], now: int) -> tuple[list[Trade], int]:
        buy = taker.side is Side.BUY
        levels = self.asks if buy else self.bids
        trades = []
        while volume > 0 and levels:
            tick, level = levels.peekitem(0 if buy else -1)
            if limit is not None and (tick > limit if buy else tick < limit):
                break
            queue = level.orders
            while volume > 0 and queue:
                maker = queue[0]
                fill = min(volume, maker.volume)
                maker.volume -= fill
                level.volume -= fill
                volume -= fill
                trades.append(Trade(tick, tick * self.tick_size, fill, now, maker.id, taker.id))
                self._log(now, "trade", maker.side.value, tick, fill, maker.id)
                if maker.volume == 0:
                    queue.popleft()
                    del self._resting[maker.id]
            if not queue:
                del levels[tick]
        filled = sum(t.volume for t in trades)
        if buy:
            self.ask_volume -= filled
        else:
            self.bid_volume -= filled
        if trades:
            self.last_trade_tick = trades[-1].price_tick
        return trades, volume

    def submit_limit(self, order: Order, now: int) -> list[Trade]:
        """Submit a limit order; a marketable one trades before resting."""
        if order.kind is not Kind.LIMIT:
            raise ValueError("submit_limit needs a limit order")
        self._register(order)
        self._log(now, "submit", order.side.value, order.price, order.volume, order.id)
        trades, remaining = self._match(order, order.volume, order.price, now)
        if remaining:
            order.volume = remaining
            levels = self.bids if order.side is Side.BUY else self.asks
            level = levels.get(order.price)
            if level is None:
                level = levels[order.price] = _Level()
            level.orders.append(order)
            level.volume += remaining
            if order.side is Side.BUY:
                self.bid_volume += remaining
            else:
                self.ask_volume += remaining
            self._resting[order.id] = order
            heapq.heappush(self._expiry, (order.expiry, order.id))
        return trades

    def submit_market(self, order: Order, now: int) -> list[Trade]:
        """Execute a market order immediately; unfilled volume is discarded."""
        if order.kind is not Kind.MARKET:
            raise ValueError("submit_market needs a market order")
        self._register(order)
        self._log(now, "submit", order.side.value, "", order.volume, order.id)
        trades, _ = self._match(order, order.volume, None, now)
        return trades

    def submit(self, order: Order, now: int) -> list[Trade]:
        if order.kind is Kind.LIMIT:
            return self.submit_limit(order, now)
        return self.submit_market(order, now)

    def expire(self, now: int) -> list[Order]:
        """Remove every resting order whose ``submit_time + lifetime <= now``."""
        removed = []
        heap = self._expiry
        while heap and heap[0][0] <= now:
            _, oid = heapq.heappop(heap)
            order = self._resting.pop(oid, None)
            if order is None:
                continue  # filled earlier
            levels = self.bids if order.side is Side.BUY else self.asks
            level = levels[order.price]
            level.orders.remove(order)
            level.volume -= order.volume
            if order.side is Side.BUY:
                self.bid_volume -= order.volume
            else:
                self.ask_volume -= order.volume
            if not level.orders:
                del levels[order.price]
            self._log(now, "expire", order.side.value, order.price, order.volume, order.id)
            removed.append(order)
        return removed

    # -- diagnostics -----------------------------------------------------

    def mid_tick(self) -> Optional[float]:
        bb, ba = self.best_bid(), self.best_ask()
        if bb is not None and ba is not None:
            return (bb + ba) / 2
        if bb is not None:
            return float(bb)
        if ba is not None:
            return float(ba)
        return None if self.last_trade_tick is None else float(self.last_trade_tick)

    def volume_profile(self, now: int, depth: int) -> BookSnapshot:
        """Per-level volumes within ``depth`` ticks of the midpoint."""
        if depth < 1:
            raise ValueError(f"depth must be >= 1, got {depth}")
        mid = self.mid_tick()
        if mid is None:
            return BookSnapshot(now, ())
        lo, hi = mid - depth, mid + depth
        levels = [(t, Side.BUY, lvl.volume) for t, lvl in self.bids.items() if lo <= t <= hi]
        levels += [(t, Side.SELL, lvl.volume) for t, lvl in self.asks.items() if lo <= t <= hi]
        levels.sort(key=lambda x: x[0])
        return BookSnapshot(now, tuple(levels))

    def gap_count(self, side: Side, depth: int) -> int:
        """Empty ticks between occupied levels within ``depth`` ticks past the best price."""
        if depth < 1:
            raise ValueError(f"depth must be >= 1, got {depth}")
        if side is Side.BUY:
            if not self.bids:
                return 0
            best = self.best_bid()
            occupied = list(self.bids.irange(best - depth, best))
        else:
            if not self.asks:
                return 0
            best = self.best_ask()
            occupied = list(self.asks.irange(best, best + depth))
        span = occupied[-1] - occupied[0] + 1
        return span - len(occupied)
