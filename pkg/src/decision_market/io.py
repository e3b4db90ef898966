"""CSV writers. Floats are written with 17 significant digits so a reload
reproduces them bit for bit."""
from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .equilibrium import PriceSeries, SweepResult
from .orderbook import BookSnapshot
from .stats import ImbalanceStats, MomentSummary, ReturnSeries


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return "" if x is None else str(x)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])
    return path


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_prices(path, prices: PriceSeries) -> Path:
    return write_csv(path, ("t", "price", "ln_price"),
                     zip(prices.times, prices.values, prices.log_values))


def write_returns(path, returns: ReturnSeries) -> Path:
    return write_csv(path, ("t", "r"), zip(returns.times, returns.values))


def write_histogram(path, centres, density, normal) -> Path:
    return write_csv(path, ("center", "density", "normal_density"), zip(centres, density, normal))


def write_imbalance(path, times, imbalance) -> Path:
    return write_csv(path, ("t", "imbalance"), zip(times, imbalance))


def write_summary(path, summary: MomentSummary, extra: dict | None = None,
                  imbalance: ImbalanceStats | None = None) -> Path:
    header = ["n", "mean", "variance", "skewness", "kurtosis"]
    row = [summary.n, summary.mean, summary.variance, summary.skewness, summary.kurtosis]
    if imbalance is not None:
        header += ["imbalance_variance", "imbalance_lag1_autocorr", "longest_one_sided_run"]
        row += [imbalance.variance, imbalance.lag1_autocorr, imbalance.longest_one_sided_run]
    for k, v in (extra or {}).items():
        header.append(k)
        row.append(v)
    return write_csv(path, header, [row])


def write_snapshots(path, snapshots: Sequence[BookSnapshot], tick_size: float) -> Path:
    rows = ((s.time, tick * tick_size, side.value, vol) for s in snapshots for tick, side, vol in s.levels)
    return write_csv(path, ("time", "price", "side", "volume"), rows)


def write_events(path, events: Sequence[tuple], tick_size: float) -> Path:
    rows = ((t, ev, side, "" if price == "" else price * tick_size, vol, oid)
            for t, ev, side, price, vol, oid in events)
    return write_csv(path, ("time", "event", "side", "price", "volume", "order_id"), rows)


def write_heatmap(path, result: SweepResult) -> Path:
    rows = ((a, b, result.ln_mean_price[i, j], result.n_collapsed[i, j])
            for i, a in enumerate(result.alpha_grid) for j, b in enumerate(result.beta_grid))
    return write_csv(path, ("alpha", "beta", "ln_mean_S", "n_collapsed"), rows)


def write_alpha_sweep(path, result: SweepResult) -> Path:
    rows = ((a, result.mean_price[i, 0], result.ln_mean_price[i, 0], result.n_seeds,
             result.n_collapsed[i, 0]) for i, a in enumerate(result.alpha_grid))
    return write_csv(path, ("alpha_abm", "mean_S", "ln_mean_S", "n_seeds", "n_collapsed"), rows)


def write_run_meta(out_dir: Path, meta: dict, artifacts: Sequence[Path]) -> Path:
    meta = dict(meta)
    meta["artifacts"] = {p.name: sha256(p) for p in artifacts}
    path = Path(out_dir) / "run_meta.json"
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path
