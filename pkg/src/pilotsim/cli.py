"""Command-line entry point: ``pilotsim {sweep,validate,ceiling}``.

Exit codes: 0 success, 1 configuration/usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .errors import ConfigError, PilotSimError
from .estimation import allocate_pilots, estimate_variance, write_q_csv
from .experiments import SweepSpec, emit_csv, run_sweep
from .rate import asymptotic_ceiling, group_users
from .scenario import SystemConfig, load_config, make_scenario

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pilotsim", description="Multi-cell massive MIMO pilot-contamination simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sweep = sub.add_parser("sweep", help="run a parameter sweep and write CSV")
    sweep.add_argument("--param", required=True, choices=["antennas", "pilot-reuse", "cells"])
    sweep.add_argument("--values", required=True, help="comma-separated, strictly increasing")
    sweep.add_argument("--config", help="JSON config file (defaults if omitted)")
    sweep.add_argument("--trials", type=int, default=500)
    sweep.add_argument("--drops", type=int, default=10)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--precoder", choices=["mrt", "zf", "both"], default="both")
    sweep.add_argument("--mode", choices=["mc", "cf", "both"], default="cf")
    sweep.add_argument("--grouping", choices=["on", "off"])
    sweep.add_argument("--workers", type=int, default=1)
    sweep.add_argument("--out", help="CSV path (stdout if omitted)")

    for name, text in (("validate", "check a config and summarize estimate quality"),
                       ("ceiling", "print the per-user pilot-contamination SINR ceiling")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="JSON config file (defaults if omitted)")
        p.add_argument("--seed", type=int, default=0, help="user-drop seed")
        if name == "validate":
            p.add_argument("--dump-q", metavar="FILE", help="write l,j,k,beta,q rows to CSV")
    return parser


def _config(path) -> SystemConfig:
    return load_config(path) if path else SystemConfig()


def _parse_values(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"--values must be comma-separated integers: {text!r}") from exc


def _scenario(config, seed):
    _, beta = make_scenario(config, seed)
    grouping = group_users(beta, config) if config.grouping_enabled else None
    pa = allocate_pilots(config, grouping)
    return beta, pa, estimate_variance(beta, pa, config)


def _cmd_sweep(args) -> int:
    config = _config(args.config)
    if args.grouping is not None:
        config = config.replace(grouping_enabled=args.grouping == "on")
    cf_mode = "cf_" + config.sinr_mode
    modes = {"mc": ("mc",), "cf": (cf_mode,), "both": ("mc", cf_mode)}[args.mode]
    precoders = {"mrt": ("MRT",), "zf": ("ZF",), "both": ("MRT", "ZF")}[args.precoder]
    spec = SweepSpec(args.param.replace("-", "_"), _parse_values(args.values), config,
                     n_trials=args.trials if "mc" in modes else 0, n_drops=args.drops,
                     seed=args.seed, precoders=precoders, modes=modes)
    result = run_sweep(spec, workers=args.workers)
    text = emit_csv(result, args.out)
    if args.out is None:
        sys.stdout.write(text)
    else:
        print(f"wrote {len(result.rows)} rows to {args.out} in {result.runtime:.1f} s", file=sys.stderr)
    return EXIT_OK


def _cmd_validate(args) -> int:
    config = _config(args.config)
    beta, pa, q = _scenario(config, args.seed)
    if np.any(q > beta) or np.any(q < 0):
        raise PilotSimError("estimate variance outside [0, beta]")
    L, K, M = config.num_cells, config.users_per_cell, config.num_antennas
    cells = np.arange(L)
    quality = q[cells, cells] / beta[cells, cells]
    print(f"cells L={L}  users K={K}  antennas M={M}")
    print(f"pilot scheme={pa.scheme}  pilot length T_p={pa.pilot_length}  "
          f"coherence T_c={config.coherence_block}  prelog={1 - pa.pilot_length / config.coherence_block:.4f}")
    print(f"serving-link estimate quality q/beta: min={quality.min():.4f} "
          f"mean={quality.mean():.4f} max={quality.max():.4f}")
    print(f"q over all links: min={q.min():.4e} max={q.max():.4e}")
    if M <= K:
        print("note: M <= K, zero-forcing is unavailable")
    if args.dump_q:
        write_q_csv(args.dump_q, beta, q)
    print("config OK")
    return EXIT_OK


def _cmd_ceiling(args) -> int:
    config = _config(args.config)
    beta, pa, q = _scenario(config, args.seed)
    gamma_inf = asymptotic_ceiling(q, pa, config)
    print("cell,user,gamma_inf,ceiling_rate_bits")
    for (j, k), g in np.ndenumerate(gamma_inf):
        g = float(g)
        print(f"{j},{k},{g!r},{float(np.log2(1 + g))!r}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {"sweep": _cmd_sweep, "validate": _cmd_validate, "ceiling": _cmd_ceiling}[args.command]
        return handler(args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PilotSimError, OSError, ArithmeticError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
