"""Command-line entry point.

Subcommands: ``sweep`` and ``trace`` drive the experiments from a YAML
config, ``dist`` repeats a sweep for all three coupling distributions,
``oracle`` evaluates the analytic formulas, and ``fock-check`` is a debug
command comparing the engine against the brute-force Fock oracle.

All quantities are in natural units hbar = k_B = 1 with energies in
omega0; exit codes are 0 (success), 2 (usage/config error),
3 (numerical failure).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, analytics, fock
from .config import (
    ConfigError,
    apply_full_preset,
    config_hash,
    load_config,
    make_valve_config,
)
from .experiments import run_distribution_comparison, run_sweep, run_trace, simulate_trace
from .valve import ValveConfig, sample_bath

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

UNITS_COMMENT = "# units: omega0 = 1; time in 1/omega0; currents in hbar*omega0^2\n"

SWEEP_HEADER = [
    "gamma_over_omega0", "kind", "mean_current", "std_current",
    "landauer", "weak_coupling", "realizations",
]
TRACE_HEADER = ["time", "kind", "N", "total", "normal", "anomalous", "pert_anomalous"]


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(UNITS_COMMENT)
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_manifest(out_dir: Path, cfg: dict, started: float, outputs: list[str]) -> None:
    manifest = {
        "tool": "heatvalve",
        "tool_version": __version__,
        "config_hash": config_hash(cfg),
        "master_seed": cfg["seed"],
        "started": datetime.fromtimestamp(started, timezone.utc).isoformat(),
        "finished": datetime.now(timezone.utc).isoformat(),
        "outputs": outputs,
    }
    tmp = out_dir / "manifest.json.tmp"
    tmp.write_text(json.dumps(manifest, indent=2) + "\n")
    tmp.replace(out_dir / "manifest.json")


def _load(args) -> dict:
    cfg = load_config(args.config)
    if getattr(args, "full", False):
        cfg = apply_full_preset(cfg)
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = args.seed
    if getattr(args, "kind", None) is not None:
        cfg["kind"] = args.kind
    return cfg


def _kinds(cfg: dict) -> tuple[str, ...]:
    return ("exact", "rwa") if cfg["kind"] == "both" else (cfg["kind"],)


def _sweep_rows(records):
    for r in records:
        yield (
            r.gamma_over_omega0, r.kind, r.mean_current, r.std_current,
            r.landauer, r.weak_coupling, r.realizations,
        )


def cmd_sweep(args) -> int:
    cfg = _load(args)
    if cfg["gamma_grid"] is None:
        raise ConfigError("missing required config key 'gamma_grid'")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.time()
    template = make_valve_config(cfg, gamma=0.0, rwa=False)
    records = run_sweep(
        template,
        cfg["gamma_grid"],
        cfg["realizations"],
        kinds=_kinds(cfg),
        window=tuple(cfg["window"]),
        time_step=cfg["time_step"],
        n_jobs=args.jobs,
    )
    path = out_dir / "sweep.csv"
    _write_csv(path, SWEEP_HEADER, _sweep_rows(records))
    _write_manifest(out_dir, cfg, started, [path.name])
    print(f"wrote {path}")
    return EXIT_OK


def cmd_trace(args) -> int:
    cfg = _load(args)
    if cfg["gamma"] is None:
        raise ConfigError("missing required config key 'gamma'")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.time()
    times = np.arange(0.0, cfg["t_max"] + cfg["time_step"] / 2, cfg["time_step"])
    sizes = cfg["bath_sizes"] or [cfg["bath_size"]]
    rows = []
    for N in sizes:
        for kind in _kinds(cfg):
            vc = make_valve_config(cfg, gamma=cfg["gamma"], rwa=(kind == "rwa"), bath_size=N)
            for rec in run_trace(vc, times):
                rows.append(
                    (rec.time, rec.kind, rec.bath_size, rec.total,
                     rec.normal, rec.anomalous, rec.pert_anomalous)
                )
    path = out_dir / "trace.csv"
    _write_csv(path, TRACE_HEADER, rows)
    _write_manifest(out_dir, cfg, started, [path.name])
    print(f"wrote {path}")
    return EXIT_OK


def cmd_dist(args) -> int:
    cfg = _load(args)
    if cfg["gamma_grid"] is None:
        raise ConfigError("missing required config key 'gamma_grid'")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.time()
    template = make_valve_config(cfg, gamma=0.0, rwa=False)
    by_dist = run_distribution_comparison(
        template,
        cfg["gamma_grid"],
        cfg["realizations"],
        kinds=_kinds(cfg),
        window=tuple(cfg["window"]),
        time_step=cfg["time_step"],
        n_jobs=args.jobs,
    )
    outputs = []
    for dist, records in by_dist.items():
        path = out_dir / f"sweep_{dist}.csv"
        _write_csv(path, SWEEP_HEADER, _sweep_rows(records))
        outputs.append(path.name)
    _write_manifest(out_dir, cfg, started, outputs)
    print(f"wrote {', '.join(str(out_dir / o) for o in outputs)}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    if args.formula == "fermi":
        val = analytics.fermi(args.x)
    else:
        spec = analytics.UniformBathSpec.from_coupling_scale(args.gamma, args.n)
        gamma_sd = analytics.spectral_density(spec)
        if args.formula == "weak":
            val = analytics.weak_coupling_current(gamma_sd, gamma_sd, args.t1, args.t2)
        elif args.formula == "landauer":
            val = analytics.landauer_current(spec, spec, args.t1, args.t2)
        elif args.formula == "transmission":
            val = analytics.transmission(spec, spec, args.omega)
        elif args.formula == "selfenergy":
            val = analytics.self_energy(spec, args.omega)
        else:  # anomalous (continuum limit)
            val = analytics.anomalous_current_continuum(spec, args.temp, args.t)
    print(repr(float(val)))
    return EXIT_OK


def cmd_fock_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    cfg = ValveConfig(
        bath_size=args.n,
        gamma=args.gamma,
        t_hot=1.0,
        t_cold=0.0,
        rwa=args.rwa,
        seed=int(rng.integers(2**63)),
    )
    times = np.linspace(0.0, 20.0, 81)
    trace = simulate_trace(cfg, times)
    bath = sample_bath(cfg)
    exact = fock.exact_current(cfg, bath, times)
    dev = np.abs(trace.total - exact).max()
    print(f"max |engine - fock| over t in [0,20]: {dev:.3e}")
    return EXIT_OK if dev < 1e-9 else EXIT_NUMERICAL


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="YAML experiment config")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--full", action="store_true", help="apply the figure-scale preset")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.add_argument("--kind", choices=["exact", "rwa", "both"], default=None,
                   help="override the Hamiltonian kind")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heatvalve",
        description="Exact heat transport in quadratic fermionic systems "
                    "(natural units: hbar = k_B = 1, energies in omega0).",
    )
    parser.add_argument("--version", action="version", version=f"heatvalve {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="steady-state current vs coupling strength")
    _add_run_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("trace", help="heat-current time traces")
    _add_run_flags(p)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("dist", help="sweep repeated for all coupling distributions")
    _add_run_flags(p)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("oracle", help="evaluate an analytic formula")
    p.add_argument("formula", choices=[
        "fermi", "weak", "landauer", "transmission", "selfenergy", "anomalous",
    ])
    p.add_argument("--x", type=float, default=1.0, help="fermi argument beta*omega")
    p.add_argument("--gamma", type=float, default=0.1, help="coupling scale gamma/omega0")
    p.add_argument("--n", type=int, default=1200, help="bath size")
    p.add_argument("--t1", type=float, default=1.0, help="hot bath temperature")
    p.add_argument("--t2", type=float, default=0.0, help="cold bath temperature")
    p.add_argument("--omega", type=float, default=1.0, help="evaluation frequency")
    p.add_argument("--temp", type=float, default=0.0, help="bath temperature (anomalous)")
    p.add_argument("--t", type=float, default=1.0, help="time (anomalous)")
    p.set_defaults(func=cmd_oracle)

    # debug command, intentionally undocumented in the top-level help
    p = sub.add_parser("fock-check")
    p.add_argument("--n", type=int, default=2, help="bath size (M = 2N+1 <= 12)")
    p.add_argument("--gamma", type=float, default=0.3)
    p.add_argument("--rwa", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fock_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (np.linalg.LinAlgError, FloatingPointError, RuntimeError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
