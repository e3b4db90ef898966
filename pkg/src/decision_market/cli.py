"""Command-line entry point: ``sim <command> [options]``.

Exit codes: 0 success, 2 configuration error, 3 no statistics could be
computed (collapsed or empty run), 4 I/O failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from . import io
from .config import ConfigError, RunConfig, emit_config, parse_config, parse_text
from .equilibrium import run_equilibrium, sweep_phase_diagram
from .seeding import GENERATOR_NAME
from .simulation import run_orderbook_sim, sweep_alpha_abm
from .stats import histogram, imbalance_stats, make_returns, moments

log = logging.getLogger("decision_market")

COMMANDS = ("equilibrium", "orderbook", "baseline", "sweep-eq", "sweep-abm")

EXIT_OK, EXIT_CONFIG, EXIT_COLLAPSE, EXIT_IO = 0, 2, 3, 4


class NoStatistics(RuntimeError):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sim", description="Decision-model market simulator")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="flat 'section.key = value' file")
        s.add_argument("--seed", type=int, help="master seed (overrides run.seed)")
        s.add_argument("--out", default=".", help="output directory")
        s.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override one config key; repeatable")
        if name in ("equilibrium", "sweep-eq"):
            s.add_argument("--steps", type=int, help="equilibrium.steps")
        else:
            s.add_argument("--horizon", type=int, help="orderbook.horizon")
        if name.startswith("sweep"):
            s.add_argument("--seeds", type=int, help="replicates per grid point")
            s.add_argument("--alpha", help="alpha grid: list or start:stop:count[:log]")
        if name == "sweep-eq":
            s.add_argument("--beta", help="beta grid: list or start:stop:count[:log]")
        if name == "sweep-abm":
            s.add_argument("--workers", type=int, help="worker processes")
        if name in ("orderbook", "baseline"):
            s.add_argument("--event-log", action="store_true", help="also write events.csv")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def _overrides(args) -> dict[str, str]:
    out: dict[str, str] = {}
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    flag_keys = {
        "seed": "run.seed", "steps": "equilibrium.steps", "horizon": "orderbook.horizon",
        "beta": "sweep_eq.beta", "workers": "sweep_abm.workers",
    }
    if args.command == "sweep-eq":
        flag_keys.update(seeds="sweep_eq.seeds", alpha="sweep_eq.alpha")
    elif args.command == "sweep-abm":
        flag_keys.update(seeds="sweep_abm.seeds", alpha="sweep_abm.alpha_abm")
    for attr, key in flag_keys.items():
        val = getattr(args, attr, None)
        if val is not None:
            out[key] = str(val)
    if getattr(args, "event_log", False):
        out["orderbook.event_log"] = "true"
    if args.command == "baseline":
        out["decision.count"] = "0"
        out["decision.initial_buyers"] = "0"
    return out


def load_config(args) -> RunConfig:
    overrides = _overrides(args)
    if args.config:
        return parse_config(args.config, overrides)
    return parse_text("", overrides)


def _return_artifacts(out: Path, prices, interval: int, cfg: RunConfig, extra: dict,
                      imbalance=None) -> list[Path]:
    st = cfg.stats
    try:
        rets = make_returns(prices, interval, log=st.log_returns)
        summary = moments(rets.values)
    except ValueError as exc:
        raise NoStatistics(str(exc)) from None
    files = [io.write_returns(out / "returns.csv", rets),
             io.write_histogram(out / "hist.csv", *histogram(rets.values, st.bins))]
    imb = imbalance_stats(imbalance) if imbalance is not None and len(imbalance) else None
    files.append(io.write_summary(out / "summary.csv", summary, extra, imb))
    return files


def run_command(cfg: RunConfig, command: str, out: Path) -> list[Path]:
    """Run one experiment and write its CSV artifacts into ``out``."""
    out.mkdir(parents=True, exist_ok=True)
    if command == "equilibrium":
        ec = cfg.equilibrium
        prices = run_equilibrium(ec)
        files = [io.write_prices(out / "prices.csv", prices)]
        extra = {"collapsed": prices.collapsed, "ln_terminal_price": float(prices.log_values[-1])}
        try:
            files += _return_artifacts(out, prices, cfg.stats.equilibrium_return_interval, cfg, extra)
        except NoStatistics:
            io.write_run_meta(out, _meta(cfg, command), files)
            raise
        return files
    if command in ("orderbook", "baseline"):
        oc = cfg.orderbook
        res = run_orderbook_sim(oc, record_events=cfg["orderbook.event_log"])
        files = [io.write_prices(out / "prices.csv", res.prices),
                 io.write_imbalance(out / "imbalance.csv", res.imbalance_times, res.imbalance),
                 io.write_snapshots(out / "snapshots.csv", res.snapshots, oc.tick_size)]
        if res.events is not None:
            files.append(io.write_events(out / "events.csv", res.events, oc.tick_size))
        extra = {"trades": res.trades, "empty_book_seconds": res.empty_book_seconds,
                 "redraws": res.redraws, "collapsed": res.collapsed}
        try:
            files += _return_artifacts(out, res.prices, cfg.stats.return_interval, cfg, extra,
                                       res.imbalance)
        except NoStatistics:
            io.write_run_meta(out, _meta(cfg, command), files)
            raise
        return files
    if command == "sweep-eq":
        sw = cfg.sweep_eq
        result = sweep_phase_diagram(sw.alpha, sw.beta, sw.seeds, cfg.equilibrium)
        files = [io.write_heatmap(out / "heatmap.csv", result)]
        if (result.n_collapsed == sw.seeds).all():
            io.write_run_meta(out, _meta(cfg, command), files)
            raise NoStatistics("every replicate of every cell collapsed")
        return files
    if command == "sweep-abm":
        sw = cfg.sweep_abm
        result = sweep_alpha_abm(sw.alpha, sw.seeds, cfg.orderbook, workers=sw.workers)
        files = [io.write_alpha_sweep(out / "sweep_abm.csv", result)]
        if (result.n_collapsed == sw.seeds).all():
            io.write_run_meta(out, _meta(cfg, command), files)
            raise NoStatistics("every run of the sweep produced no trades")
        return files
    raise ValueError(f"unknown command {command!r}")


def _meta(cfg: RunConfig, command: str) -> dict:
    return {
        "command": command,
        "seed": cfg.seed,
        "generator": GENERATOR_NAME,
        "seed_derivation": "numpy.random.SeedSequence(master, spawn_key=(cell, replicate))",
        "version": __version__,
        "config": emit_config(cfg).splitlines(),
    }


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    try:
        files = run_command(cfg, args.command, out)
        io.write_run_meta(out, _meta(cfg, args.command), files)
    except NoStatistics as exc:
        print(f"no statistics: {exc}", file=sys.stderr)
        return EXIT_COLLAPSE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    log.info("wrote %d artifacts to %s", len(files), out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
