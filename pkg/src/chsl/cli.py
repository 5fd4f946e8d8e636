"""Command line driver.

Subcommands ``evolve``, ``converge``, ``sweep`` and ``trace`` read an
optional JSON config file, apply flag overrides, run the experiment and
write CSV tables, a JSON summary and rendered figures into the output
directory.

Exit codes: 0 success, 2 configuration error, 3 blow-up in a non-sweep run.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .experiments import (
    ConfigError,
    ExperimentConfig,
    run_convergence_study,
    run_energy_trace,
    run_evolve,
    run_stability_sweep,
    write_convergence_csv,
    write_json,
    write_sweep_csv,
    write_trace_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chsl",
        description="Spectral Cahn-Hilliard solver with a stabilized "
        "linear Crank-Nicolson stepper",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("evolve", "run the stepper and write trace + final snapshot"),
        ("converge", "time-step convergence study against a fine reference"),
        ("sweep", "minimal-stabilizer search over a (gamma, tau) grid"),
        ("trace", "per-step energy/mass records for several step sizes"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", type=Path, help="JSON config file")
        p.add_argument("--seed", type=int, help="64-bit PRNG seed")
        p.add_argument("--tau", type=float, action="append",
                       help="step size; repeat the flag for a list")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--m", type=int, help="basis dimension per direction")
        p.add_argument("--epsilon", type=float, help="interface thickness")
        p.add_argument("--gamma", type=float, help="relaxation parameter")
        p.add_argument("--stab-a", type=float, help="gradient stabilizer A")
        p.add_argument("--stab-b", type=float, help="curvature stabilizer B")
        p.add_argument("--t-final", type=float, help="final time")
        p.add_argument("--steps", type=int, help="number of steps")
        p.add_argument("--tau-ref", type=float, help="reference step size (converge)")
        p.add_argument("--snapshot-in", type=Path, help="start from a snapshot (evolve)")
        p.add_argument("--unsafe-potential", action="store_true",
                       help="use the raw quartic well instead of the truncated one")
        p.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    return parser


def _config_from_args(args) -> ExperimentConfig:
    data: dict = {}
    if args.config is not None:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    data["kind"] = args.command
    if args.seed is not None:
        data["seed"] = args.seed
    if args.tau:
        if args.command in ("converge", "trace", "sweep"):
            data["taus"] = args.tau
        else:
            data["tau"] = args.tau[-1]
    for flag, key in (
        ("m", "m"), ("epsilon", "epsilon"), ("gamma", "gamma"),
        ("stab_a", "stab_a"), ("stab_b", "stab_b"), ("t_final", "t_final"),
        ("steps", "steps"), ("tau_ref", "tau_ref"),
    ):
        value = getattr(args, flag)
        if value is not None:
            data[key] = value
    if args.snapshot_in is not None:
        data["snapshot_in"] = str(args.snapshot_in)
    if args.unsafe_potential:
        data["potential"] = "quartic"
    if args.out is not None:
        data["out_dir"] = str(args.out)
    if args.no_plots:
        data["make_plots"] = False
    return ExperimentConfig.from_dict(data).resolved()


def _outdir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out_dir) if cfg.out_dir else Path(f"chsl-{cfg.kind}")
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "config.json", cfg.to_dict())
    return out


def _cmd_evolve(cfg: ExperimentConfig) -> int:
    from .snapshot import snapshot_write

    out = _outdir(cfg)
    result = run_evolve(cfg)
    from .experiments import TraceResult

    write_trace_csv(out / "evolve_trace.csv", TraceResult([(cfg.tau, result.trace, result.blew_up)], cfg))
    snapshot_write(result.state.phi_n, out / "evolve_final.snap")
    if cfg.make_plots:
        from . import plots

        plots.render_field(result.state.phi_n, out / "evolve_field.png",
                           title=f"state after {result.state.n} steps")
    if result.blew_up:
        print(f"run blew up at step {result.blow_up_step}; outputs in {out}", file=sys.stderr)
        return EXIT_BLOWUP
    print(f"evolved {result.state.n} steps; outputs in {out}")
    return EXIT_OK


def _cmd_converge(cfg: ExperimentConfig) -> int:
    out = _outdir(cfg)
    result = run_convergence_study(cfg)
    write_convergence_csv(out / "converge.csv", result)
    summary = {
        "config": cfg.to_dict(),
        "rows": [
            {"tau": r.tau, "h_minus1": r.errors.h_minus1, "l2": r.errors.l2,
             "h1": r.errors.h1}
            for r in result.rows
        ],
        "orders": result.orders() if len(result.rows) >= 2 else {},
        "blew_up": result.blew_up,
    }
    write_json(out / "converge_summary.json", summary)
    if cfg.make_plots and result.rows:
        from . import plots

        plots.render_convergence(result, out / "converge.png")
    if result.blew_up:
        print(f"study aborted: blow-up at tau={result.blow_up_tau}; outputs in {out}",
              file=sys.stderr)
        return EXIT_BLOWUP
    print(f"convergence study done; outputs in {out}")
    return EXIT_OK


def _cmd_sweep(cfg: ExperimentConfig) -> int:
    out = _outdir(cfg)
    result = run_stability_sweep(cfg)
    write_sweep_csv(out / "sweep.csv", result)
    summary = {
        "config": cfg.to_dict(),
        "cells": [
            {"search": c.search, "gamma": c.gamma, c.fixed_name: c.fixed_value,
             "tau": c.tau,
             "min_value": ("inf" if math.isinf(c.min_value) else c.min_value)}
            for c in result.cells
        ],
    }
    write_json(out / "sweep_summary.json", summary)
    if cfg.make_plots:
        from . import plots

        plots.render_sweep(result, out / "sweep.png")
    print(f"sweep done ({len(result.cells)} cells); outputs in {out}")
    return EXIT_OK


def _cmd_trace(cfg: ExperimentConfig) -> int:
    out = _outdir(cfg)
    result = run_energy_trace(cfg)
    write_trace_csv(out / "trace.csv", result)
    if cfg.make_plots:
        from . import plots

        plots.render_trace(result, out / "trace.png")
    if any(blew for _, _, blew in result.runs):
        print(f"at least one trace run blew up; outputs in {out}", file=sys.stderr)
        return EXIT_BLOWUP
    print(f"energy trace done; outputs in {out}")
    return EXIT_OK


_COMMANDS = {
    "evolve": _cmd_evolve,
    "converge": _cmd_converge,
    "sweep": _cmd_sweep,
    "trace": _cmd_trace,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return _COMMANDS[args.command](cfg)


if __name__ == "__main__":
    sys.exit(main())
