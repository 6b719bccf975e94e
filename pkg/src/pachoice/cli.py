"""Command-line interface.

Three subcommands:

  theory     print the regime classification and predicted constants as JSON
  simulate   one run; writes trajectory.csv + summary.json into --out
  sweep      parameter grid x replicate seeds; per-run trajectory CSVs plus
             one sweep_summary.json (an array of per-run summary objects)

Every parameter flag can instead be supplied through --config FILE, a flat
JSON object whose keys equal the flag names (m, k, d, T, beta, p,
self_loops, edge_weighting, n, seed, seeds, checkpoints, out, jobs).
Command-line values always override config-file values.  Exit codes:
0 success, 2 invalid parameters/config, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from .errors import PAChoiceError
from .experiments import run_summary, sweep
from .model import ModelParams, new_params
from .process import GeometricSchedule, RunConfig, run
from .theory import classify_regime
from .trajectory import atomic_write_bytes, json_bytes, save_trajectory, trajectory_csv_bytes

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3


def _add_param_flags(p: argparse.ArgumentParser, grid: bool = False) -> None:
    to_list = (lambda cast: (lambda s: [cast(v) for v in s.split(",")])) if grid else None
    intarg = to_list(int) if grid else int
    floatarg = to_list(float) if grid else float
    p.add_argument("--m", type=intarg, default=None, help="edges per vertex step")
    p.add_argument("--k", type=intarg, default=None, help="pairs per edge step")
    p.add_argument("--d", type=intarg, default=None, help="choice sample size (>= 2)")
    p.add_argument("--T", type=int, default=None, help="number of vertex types")
    p.add_argument("--p", type=str, default=None,
                   help="comma-separated type probabilities (default: uniform)")
    p.add_argument("--beta", type=floatarg, default=None, help="weight offset (> -1)")
    p.add_argument("--self-loops", dest="self_loops", type=intarg, default=None,
                   help="seed vertex self-loops (default: m)")
    p.add_argument("--edge-weighting", dest="edge_weighting", choices=["post", "pre"],
                   default=None, help="edge-step weight snapshot (default: post)")
    p.add_argument("--config", type=str, default=None,
                   help="flat JSON config file; flags override its values")


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=None, help="final vertex count")
    p.add_argument("--seed", type=int, default=None, help="run seed (sweep: root seed)")
    p.add_argument("--checkpoints", type=str, default=None,
                   help="'geometric[:factor[:start]]' or comma-separated step list")
    p.add_argument("--out", type=str, default=None, help="output directory (must exist)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pachoice",
        description="Typed preferential attachment with a choice-based edge step.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p_theory = sub.add_parser("theory", help="print regime classification as JSON")
    _add_param_flags(p_theory)

    p_sim = sub.add_parser("simulate", help="run once, write trajectory + summary")
    _add_param_flags(p_sim)
    _add_run_flags(p_sim)

    p_sweep = sub.add_parser("sweep", help="grid of parameter cells x seeds")
    _add_param_flags(p_sweep, grid=True)
    _add_run_flags(p_sweep)
    p_sweep.add_argument("--seeds", type=int, default=None,
                         help="replicates per grid cell (default 1)")
    p_sweep.add_argument("--jobs", type=int, default=None,
                         help="parallel runs (default 1)")
    return ap


def _load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    with open(path, "rb") as fh:
        data = json.loads(fh.read().decode("utf-8"))
    if not isinstance(data, dict):
        raise ValueError("config file must hold a flat JSON object")
    return data


def _merged(args: argparse.Namespace, config: dict, key: str, default=None):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config and config[key] is not None:
        return config[key]
    return default


def _parse_probs(raw) -> Optional[list[float]]:
    if raw is None:
        return None
    if isinstance(raw, str):
        return [float(v) for v in raw.split(",")]
    return [float(v) for v in raw]


def _build_params(args, config, scalar=True) -> ModelParams:
    def one(key, default):
        v = _merged(args, config, key, default)
        if isinstance(v, list):
            if not scalar and len(v) == 1:
                return v[0]
            raise ValueError(f"--{key} must be a single value here, got {v!r}")
        return v

    return new_params(
        m=one("m", 1),
        k=one("k", 1),
        d=one("d", 2),
        T=_merged(args, config, "T", 1),
        beta=one("beta", 0.0),
        type_probs=_parse_probs(_merged(args, config, "p")),
        initial_self_loops=one("self_loops", None),
        edge_weighting=_merged(args, config, "edge_weighting", "post"),
    )


def _parse_checkpoints(raw):
    if raw is None:
        return None
    if isinstance(raw, (list, tuple)):
        return [int(v) for v in raw]
    raw = str(raw)
    if raw.startswith("geometric"):
        parts = raw.split(":")
        factor = float(parts[1]) if len(parts) > 1 else 10.0 ** 0.25
        start = int(parts[2]) if len(parts) > 2 else 100
        return GeometricSchedule(start=start, factor=factor)
    return [int(v) for v in raw.split(",")]


def _require_out_dir(out: Optional[str]) -> str:
    if not out:
        raise ValueError("an output directory is required (--out)")
    if not os.path.isdir(out):
        raise OSError(f"output directory does not exist: {out}")
    return out


def cmd_theory(args) -> int:
    config = _load_config(args.config)
    params = _build_params(args, config)
    summary = classify_regime(params)
    payload = {
        "params": {
            "m": params.m, "k": params.k, "d": params.d, "T": params.num_types,
            "beta": params.beta, "p": list(params.type_probs),
        },
        "regime": summary.regime.value,
        "rho": summary.rho,
        "x_star": summary.x_star,
        "condensate_fraction_by_type":
            None if summary.condensate_fraction_by_type is None
            else list(summary.condensate_fraction_by_type),
        "critical_constant_by_type":
            None if summary.critical_constant_by_type is None
            else list(summary.critical_constant_by_type),
        "subcritical_exponent": summary.subcritical_exponent,
    }
    print(json.dumps(payload, sort_keys=True, indent=2))
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = _load_config(args.config)
    params = _build_params(args, config)
    n_steps = int(_merged(args, config, "n", 1000))
    seed = int(_merged(args, config, "seed", 0))
    checkpoints = _parse_checkpoints(_merged(args, config, "checkpoints"))
    run_config = RunConfig(params=params, n_steps=n_steps, seed=seed, checkpoints=checkpoints)
    traj = run(run_config)
    out = _require_out_dir(_merged(args, config, "out"))
    save_trajectory(traj, os.path.join(out, "trajectory.csv"))
    atomic_write_bytes(os.path.join(out, "summary.json"), json_bytes(run_summary(traj)))
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _load_config(args.config)

    def cell_values(key, default):
        v = _merged(args, config, key, default)
        if v is None:
            return [None]
        return v if isinstance(v, list) else [v]

    ms = cell_values("m", 1)
    ks = cell_values("k", 1)
    ds = cell_values("d", 2)
    betas = cell_values("beta", 0.0)
    loops = cell_values("self_loops", None)
    T = _merged(args, config, "T", 1)
    probs = _parse_probs(_merged(args, config, "p"))
    weighting = _merged(args, config, "edge_weighting", "post")

    grid = [
        new_params(m=m, k=k, d=d, T=T, beta=b, type_probs=probs,
                   initial_self_loops=sl, edge_weighting=weighting)
        for m in ms for k in ks for d in ds for b in betas for sl in loops
    ]
    n_steps = int(_merged(args, config, "n", 1000))
    root_seed = int(_merged(args, config, "seed", 0))
    replicates = int(_merged(args, config, "seeds", 1))
    jobs = _merged(args, config, "jobs", 1)
    checkpoints = _parse_checkpoints(_merged(args, config, "checkpoints"))

    results = sweep(grid, n_steps, root_seed, replicates,
                    checkpoints=checkpoints, jobs=jobs)
    out = _require_out_dir(_merged(args, config, "out"))
    summaries = []
    for res in results:
        if res.error is not None:
            summaries.append({
                "cell_index": res.cell_index, "replicate": res.replicate,
                "seed": res.seed, "error": res.error,
            })
            continue
        name = f"run_c{res.cell_index:03d}_r{res.replicate:02d}.csv"
        atomic_write_bytes(os.path.join(out, name), trajectory_csv_bytes(res.trajectory))
        summaries.append(res.summary)
    atomic_write_bytes(os.path.join(out, "sweep_summary.json"), json_bytes(summaries))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"theory": cmd_theory, "simulate": cmd_simulate, "sweep": cmd_sweep}[args.command]
    try:
        return handler(args)
    except (PAChoiceError, ValueError, TypeError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
