"""Parameter sweeps over antennas, pilot reuse and cell count.

Every sweep point averages ``n_drops`` independent user placements.  Drop
``d`` uses the same seed at every swept value (common random numbers), so
curves are smooth and differences between points are not placement noise.
Work is split per (value, drop); each task is a pure function of its
arguments, so the CSV is byte-identical for any worker count.
"""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, PilotSimError
from .estimation import allocate_pilots, estimate_variance
from .rate import group_users, sinr_closed_form, sinr_monte_carlo
from .scenario import SystemConfig, make_scenario

__all__ = [
    "SweepSpec",
    "SweepResult",
    "SWEEP_PARAMETERS",
    "CSV_HEADER",
    "drop_seed",
    "evaluate_drop",
    "run_sweep",
    "emit_csv",
]

SWEEP_PARAMETERS = {
    "antennas": "num_antennas",
    "pilot_reuse": "pilot_reuse_factor",
    "cells": "num_cells",
}
MODES = ("mc", "cf_consistent", "cf_paper")
PRECODERS = ("MRT", "ZF")

CSV_HEADER = ["swept_param", "value", "precoder", "mode", "rate_total", "rate_mean_user",
              "sinr_db_mean", "ci95", "prelog", "k_center", "k_edge", "seed", "error"]


@dataclass
class SweepSpec:
    swept_parameter: str
    values: list
    base_config: SystemConfig = field(default_factory=SystemConfig)
    n_trials: int = 500
    n_drops: int = 10
    seed: int = 0
    precoders: tuple = PRECODERS
    modes: tuple = ("cf_consistent",)

    def __post_init__(self):
        if self.swept_parameter not in SWEEP_PARAMETERS:
            raise ConfigError(f"swept_parameter must be one of {sorted(SWEEP_PARAMETERS)}")
        self.values = [int(v) for v in self.values]
        if not self.values:
            raise ConfigError("sweep needs at least one value")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ConfigError("sweep values must be strictly increasing")
        self.precoders = tuple(p.upper() for p in self.precoders)
        bad = [p for p in self.precoders if p not in PRECODERS] + [m for m in self.modes if m not in MODES]
        if bad:
            raise ConfigError(f"unknown precoder/mode: {bad}")
        if self.n_drops < 1 or self.n_trials < 0:
            raise ConfigError("n_drops must be >= 1 and n_trials >= 0")
        for v in self.values:
            self.config_for(v)

    def config_for(self, value) -> SystemConfig:
        return self.base_config.replace(**{SWEEP_PARAMETERS[self.swept_parameter]: int(value)})


@dataclass
class SweepResult:
    """One row per (value, precoder, mode), already sorted."""

    swept_parameter: str
    rows: list
    seed: int
    runtime: float = 0.0


def drop_seed(seed: int, drop: int) -> int:
    """Seed of drop ``drop``; identical at every swept value."""
    return int(np.random.SeedSequence([seed & (2**64 - 1), drop]).generate_state(1, np.uint64)[0])


def evaluate_drop(config: SystemConfig, seed: int, precoders=PRECODERS, modes=("cf_consistent",),
                  n_trials: int = 0) -> dict:
    """Rates of one user drop for every (precoder, mode).

    Returns ``{(precoder, mode): record}`` where ``record`` holds the per-user
    rate and SINR arrays plus metadata, or an ``error`` string.
    """
    _, beta = make_scenario(config, seed)
    grouping = group_users(beta, config)
    out = {}
    try:
        pa = allocate_pilots(config, grouping if config.grouping_enabled else None)
    except PilotSimError as exc:
        return {(p, m): {"error": type(exc).__name__} for p in precoders for m in modes}
    q = estimate_variance(beta, pa, config)
    prelog = 1 - pa.pilot_length / config.coherence_block
    edge = ~grouping.is_center()
    for precoder in precoders:
        for mode in modes:
            try:
                if mode == "mc":
                    if n_trials < 100:
                        raise ConfigError("Monte Carlo needs at least 100 trials")
                    gamma = sinr_monte_carlo(beta, pa, config, precoder, n_trials, seed).gamma_mc
                else:
                    gamma = sinr_closed_form(beta, q, pa, config, mode[3:], precoder).gamma_cf
            except PilotSimError as exc:
                out[precoder, mode] = {"error": type(exc).__name__}
                continue
            rate = prelog * np.log2(1 + gamma)
            out[precoder, mode] = {
                "rate": rate,
                "gamma": gamma,
                "prelog": prelog,
                "edge": edge,
                "k_center": grouping.k_center.mean(),
                "k_edge": grouping.k_edge.mean(),
            }
    return out


def _task(args):
    config, seed, precoders, modes, n_trials = args
    return evaluate_drop(config, seed, precoders, modes, n_trials)


def _aggregate(spec, value, precoder, mode, records) -> dict:
    row = {"swept_param": spec.swept_parameter, "value": value, "precoder": precoder,
           "mode": mode, "seed": spec.seed}
    errors = sorted({r["error"] for r in records if "error" in r})
    if errors:
        row["error"] = ";".join(errors)
        return row
    L = records[0]["rate"].shape[0]
    per_cell = np.array([r["rate"].sum(axis=1) for r in records])  # (drops, L)
    totals = per_cell.mean(axis=1)
    edge_rates = [r["rate"][r["edge"]] for r in records]
    edge_rates = np.concatenate(edge_rates) if any(e.size for e in edge_rates) else np.array([np.nan])
    ci = 0.0 if len(totals) < 2 else 1.96 * totals.std(ddof=1) / np.sqrt(len(totals))
    with np.errstate(divide="ignore"):
        sinr_db = 10 * np.log10(np.concatenate([r["gamma"].ravel() for r in records]))
    row.update({
        "rate_total": float(totals.mean()),
        "rate_mean_user": float(np.mean([r["rate"].mean() for r in records])),
        "sinr_db_mean": float(np.mean(sinr_db)),
        "ci95": float(ci),
        "prelog": float(records[0]["prelog"]),
        "k_center": float(np.mean([r["k_center"] for r in records])),
        "k_edge": float(np.mean([r["k_edge"] for r in records])),
        "rate_per_cell": per_cell.mean(axis=0).tolist(),
        "rate_edge_mean": float(np.mean(edge_rates)),
        "error": "",
    })
    assert len(row["rate_per_cell"]) == L
    return row


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Evaluate every swept value; per-row errors are recorded, not raised.

    ``rate_total`` is the sum rate per cell averaged over cells and drops
    (bits/s/Hz/cell).
    """
    start = time.perf_counter()
    modes = tuple(spec.modes)
    n_trials = spec.n_trials if "mc" in modes else 0
    tasks = [(spec.config_for(v), drop_seed(spec.seed, d), spec.precoders, modes, n_trials)
             for v in spec.values for d in range(spec.n_drops)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_task, tasks))
    else:
        results = [_task(t) for t in tasks]

    rows = []
    for i, value in enumerate(spec.values):
        drops = results[i * spec.n_drops:(i + 1) * spec.n_drops]
        for precoder in sorted(spec.precoders):
            for mode in sorted(modes):
                rows.append(_aggregate(spec, value, precoder, mode, [d[precoder, mode] for d in drops]))
    rows.sort(key=lambda r: (r["value"], r["precoder"], r["mode"]))
    return SweepResult(spec.swept_parameter, rows, spec.seed, time.perf_counter() - start)


def _fmt(value):
    if value is None or value == "":
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_csv(result: SweepResult | None, path=None) -> str:
    """Write the sweep as CSV (header always present); returns the text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    rows = [] if result is None else sorted(result.rows, key=lambda r: (r["value"], r["precoder"], r["mode"]))
    for row in rows:
        writer.writerow([_fmt(row.get(col, "")) for col in CSV_HEADER])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text
