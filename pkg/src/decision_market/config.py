"""Flat ``section.key = value`` run configuration.

Every key has a documented default, so an empty file is a valid
configuration. Blank lines and lines starting with ``#`` are ignored.
Grid values accept a comma list (``0.1, 0.2``) or a range
``start:stop:count`` (linear) / ``start:stop:count:log`` (log-spaced).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .agents import ANCHORS, DecisionTraderConfig, RandomTraderConfig
from .decision import DecisionParams
from .equilibrium import EquilibriumConfig
from .seeding import check_seed
from .simulation import OrderBookSimConfig


class ConfigError(ValueError):
    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.key = key
        self.line = line


def parse_grid(text: str) -> tuple[float, ...]:
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3].strip() != "log"):
            raise ValueError(f"range must be start:stop:count[:log], got {text!r}")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise ValueError("range count must be >= 1")
        if len(parts) == 4:
            if start <= 0 or stop <= 0:
                raise ValueError("log range bounds must be positive")
            return tuple(float(x) for x in np.logspace(math.log10(start), math.log10(stop), count))
        return tuple(float(x) for x in np.linspace(start, stop, count))
    values = tuple(float(x) for x in text.split(",") if x.strip())
    if not values:
        raise ValueError("grid is empty")
    return values


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _anchor(text: str) -> str:
    t = text.strip()
    if t not in ANCHORS:
        raise ValueError(f"expected one of {ANCHORS}, got {t!r}")
    return t


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    return str(value)


# key -> (parser, default, validity check, description)
_Check = Optional[Callable[[object], bool]]
SCHEMA: dict[str, tuple[Callable, object, _Check, str]] = {
    "run.seed": (int, 0, lambda v: 0 <= v < 2 ** 64, "master seed, unsigned 64-bit"),

    "equilibrium.n_agents": (int, 101, lambda v: v >= 1 and v % 2 == 1, "odd agent count"),
    "equilibrium.steps": (int, 10_000, lambda v: v >= 0, "number of price updates"),
    "equilibrium.alpha": (float, 0.5, lambda v: 0 <= v <= 1, "estimate adjustment rate"),
    "equilibrium.beta": (float, 0.5, lambda v: v >= 0, "inverse tolerance"),
    "equilibrium.dt": (float, 1.0, lambda v: v > 0, "step length in seconds"),
    "equilibrium.initial_price": (float, 100.0, lambda v: v > 0, "S(0)"),
    "equilibrium.initial_buyers": (int, 51, lambda v: v >= 0, "agents starting with m=+1"),

    "sweep_eq.alpha": (parse_grid, parse_grid("1e-4:1:20:log"),
                       lambda v: all(0 <= x <= 1 for x in v), "alpha grid"),
    "sweep_eq.beta": (parse_grid, parse_grid("1e-2:1e2:20:log"),
                      lambda v: all(x >= 0 for x in v), "beta grid"),
    "sweep_eq.seeds": (int, 10, lambda v: v >= 1, "replicates per cell"),

    "orderbook.horizon": (int, 200_000, lambda v: v >= 1, "simulated seconds incl. warm-up"),
    "orderbook.warmup": (int, 10_000, lambda v: v >= 0, "random-trader-only seconds"),
    "orderbook.initial_price": (float, 100.0, lambda v: v > 0, "S(0)"),
    "orderbook.tick_size": (float, 0.01, lambda v: v > 0, "currency per tick"),
    "orderbook.snapshot_every": (int, 300, lambda v: v >= 1, "seconds between snapshots"),
    "orderbook.snapshot_depth": (int, 100, lambda v: v >= 1, "ticks each side of mid"),
    "orderbook.event_log": (_bool, False, None, "write events.csv"),

    "random.count": (int, 400, lambda v: v >= 0, "liquidity providers"),
    "random.activation_prob": (float, 1.5e-3, lambda v: 0 < v <= 1, "per-second activation"),
    "random.price_stddev": (float, 0.08, lambda v: v >= 0, "limit price spread, currency"),
    "random.order_volume": (int, 1, lambda v: v >= 1, "shares per order"),
    "random.lifetime": (int, 120, lambda v: v >= 1, "limit order lifetime, seconds"),
    "random.anchor": (_anchor, "same_side", None, "same_side or mid"),

    "decision.count": (int, 200, lambda v: v >= 0, "decision traders"),
    "decision.activation_prob": (float, 1.5e-3, lambda v: 0 < v <= 1, "per-second activation"),
    "decision.alpha_abm": (float, 1e-4, lambda v: 0 <= v <= 1, "per-second adjustment rate"),
    "decision.beta": (float, 0.5, lambda v: v >= 0, "inverse tolerance"),
    "decision.order_volume": (int, 1, lambda v: v >= 1, "shares per market order"),
    "decision.initial_buyers": (int, 180, lambda v: v >= 0, "traders starting with m=+1"),

    "sweep_abm.alpha_abm": (parse_grid, (1e-6, 1e-5, 1e-4, 1e-3, 1e-2),
                            lambda v: all(0 <= x <= 1 for x in v), "alpha_abm values"),
    "sweep_abm.seeds": (int, 5, lambda v: v >= 1, "replicates per value"),
    "sweep_abm.workers": (int, 1, lambda v: v >= 1, "worker processes"),

    "stats.return_interval": (int, 120, lambda v: v >= 1, "order-book return window, seconds"),
    "stats.equilibrium_return_interval": (int, 1, lambda v: v >= 1, "equilibrium return window, steps"),
    "stats.bins": (int, 60, lambda v: v >= 2, "histogram bins"),
    "stats.log_returns": (_bool, False, None, "use log instead of relative returns"),
}


@dataclass(frozen=True)
class SweepSettings:
    alpha: tuple[float, ...]
    beta: tuple[float, ...]
    seeds: int
    workers: int = 1


@dataclass(frozen=True)
class StatsSettings:
    return_interval: int = 120
    equilibrium_return_interval: int = 1
    bins: int = 60
    log_returns: bool = False


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration of every experiment."""

    values: dict = field(compare=True)

    def __getitem__(self, key):
        return self.values[key]

    @property
    def seed(self) -> int:
        return self.values["run.seed"]

    @property
    def equilibrium(self) -> EquilibriumConfig:
        v = self.values
        return EquilibriumConfig(
            n_agents=v["equilibrium.n_agents"], steps=v["equilibrium.steps"],
            params=DecisionParams(alpha=v["equilibrium.alpha"], beta=v["equilibrium.beta"],
                                  dt=v["equilibrium.dt"]),
            initial_price=v["equilibrium.initial_price"],
            initial_buyers=v["equilibrium.initial_buyers"], seed=self.seed)

    @property
    def sweep_eq(self) -> SweepSettings:
        v = self.values
        return SweepSettings(v["sweep_eq.alpha"], v["sweep_eq.beta"], v["sweep_eq.seeds"])

    @property
    def sweep_abm(self) -> SweepSettings:
        v = self.values
        return SweepSettings(v["sweep_abm.alpha_abm"], (v["decision.beta"],),
                             v["sweep_abm.seeds"], v["sweep_abm.workers"])

    @property
    def orderbook(self) -> OrderBookSimConfig:
        v = self.values
        sec = lambda prefix: {k.split(".", 1)[1]: x for k, x in v.items() if k.startswith(prefix + ".")}
        ob = sec("orderbook")
        ob.pop("event_log")
        return OrderBookSimConfig(**ob, random_cfg=RandomTraderConfig(**sec("random")),
                                  decision_cfg=DecisionTraderConfig(**sec("decision")),
                                  seed=self.seed)

    @property
    def stats(self) -> StatsSettings:
        return StatsSettings(**{k.split(".", 1)[1]: x for k, x in self.values.items()
                                if k.startswith("stats.")})


def _convert(key: str, raw: str, line: Optional[int] = None):
    if key not in SCHEMA:
        raise ConfigError("unknown key", key, line)
    parser, _, check, desc = SCHEMA[key]
    try:
        value = parser(raw.strip())
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"cannot parse {raw.strip()!r}: {exc}", key, line) from None
    if check is not None and not check(value):
        raise ConfigError(f"value {raw.strip()!r} out of range ({desc})", key, line)
    return value


def _resolve(values: dict) -> RunConfig:
    """Cross-key checks, then build every nested config once to validate it."""
    cfg = RunConfig(values)
    if values["equilibrium.initial_buyers"] > values["equilibrium.n_agents"]:
        raise ConfigError("exceeds equilibrium.n_agents", "equilibrium.initial_buyers")
    if values["decision.initial_buyers"] > values["decision.count"]:
        raise ConfigError("exceeds decision.count", "decision.initial_buyers")
    if values["orderbook.warmup"] > values["orderbook.horizon"]:
        raise ConfigError("exceeds orderbook.horizon", "orderbook.warmup")
    try:
        cfg.equilibrium, cfg.orderbook, cfg.stats
        check_seed(cfg.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def parse_text(text: str, overrides: Optional[dict[str, str]] = None) -> RunConfig:
    values = {k: entry[1] for k, entry in SCHEMA.items()}
    for n, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError("expected 'section.key = value'", line=n)
        key, raw = line.split("=", 1)
        values[key.strip()] = _convert(key.strip(), raw, n)
    for key, raw in (overrides or {}).items():
        values[key] = _convert(key, raw)
    return _resolve(values)


def parse_config(path, overrides: Optional[dict[str, str]] = None) -> RunConfig:
    """Read a config file, apply defaults and ``overrides``, validate."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_text(p.read_text(), overrides)


def default_config() -> RunConfig:
    return parse_text("")


def emit_config(cfg: RunConfig) -> str:
    return "".join(f"{k} = {_fmt(cfg.values[k])}\n" for k in SCHEMA)
