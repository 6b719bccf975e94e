"""Regime estimators, hub statistics, ensembles and parameter sweeps.

A trajectory's regime statistic is compared against the theory prediction:

  subcritical    least-squares slope of log M_i(n) vs log n over the last
                 decade of checkpoints (the pre-asymptotic transient is
                 discarded; at least 5 checkpoints required);
  critical       M_i(n) ln(n) / n at the final checkpoint;
  supercritical  M_i(n) / n at the final checkpoint.

Across-seed aggregation reports median/min/max (medians are robust to the
heavy-tailed transients that liminf-style limits allow).  Sweeps derive
one seed per (cell, replicate) from the root seed by hashing, so results
are independent of execution order and parallelism.
"""

from __future__ import annotations

import hashlib
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InsufficientData
from .model import ModelParams
from .process import CheckpointSpec, RunConfig, run
from .sampler import DEFAULT_REBUILD_INTERVAL
from .theory import Regime, TheorySummary, classify_regime
from .trajectory import Trajectory, params_to_dict


@dataclass(frozen=True)
class RegimeEstimate:
    regime: Regime
    statistic: str
    value_by_type: tuple[float, ...]
    n_final: int


def estimate_regime_statistic(traj: Trajectory, summary: TheorySummary) -> RegimeEstimate:
    """Per-type statistic of the trajectory under the summary's regime."""
    rows = traj.rows
    if not rows:
        raise InsufficientData("trajectory has no checkpoints")
    T = traj.params.num_types
    final = rows[-1]
    if summary.regime is Regime.SUBCRITICAL:
        window = [r for r in rows if r.n * 10 >= final.n]
        if len(window) < 5:
            raise InsufficientData(
                f"log-log slope needs >= 5 checkpoints in the last decade, got {len(window)}"
            )
        values = []
        for t in range(T):
            ms = [r.max_degree_by_type[t] for r in window]
            if any(mv <= 0 for mv in ms):
                raise InsufficientData(f"type {t} has zero max degree in the fit window")
            xs = np.log([r.n for r in window])
            ys = np.log(ms)
            slope = float(np.polyfit(xs, ys, 1)[0])
            values.append(slope)
        return RegimeEstimate(summary.regime, "log_log_slope", tuple(values), final.n)
    if summary.regime is Regime.CRITICAL:
        scale = math.log(final.n) / final.n
        values = tuple(mv * scale for mv in final.max_degree_by_type)
        return RegimeEstimate(summary.regime, "max_degree_log_ratio", values, final.n)
    values = tuple(mv / final.n for mv in final.max_degree_by_type)
    return RegimeEstimate(summary.regime, "max_degree_fraction", values, final.n)


@dataclass(frozen=True)
class AggregateStats:
    regime: Regime
    statistic: str
    seeds: int
    median_by_type: tuple[float, ...]
    min_by_type: tuple[float, ...]
    max_by_type: tuple[float, ...]


def aggregate_regime_statistics(estimates: Sequence[RegimeEstimate]) -> AggregateStats:
    """Median/min/max per type over an ensemble of at least 5 seeds."""
    if len(estimates) < 5:
        raise InsufficientData(f"need >= 5 seeds to aggregate, got {len(estimates)}")
    regimes = {e.regime for e in estimates}
    stats = {e.statistic for e in estimates}
    if len(regimes) != 1 or len(stats) != 1:
        raise ValueError("cannot aggregate estimates of different regimes/statistics")
    mat = np.array([e.value_by_type for e in estimates], dtype=float)
    return AggregateStats(
        regime=estimates[0].regime,
        statistic=estimates[0].statistic,
        seeds=len(estimates),
        median_by_type=tuple(np.median(mat, axis=0)),
        min_by_type=tuple(mat.min(axis=0)),
        max_by_type=tuple(mat.max(axis=0)),
    )


# ---------------------------------------------------------------------------
# persistent-hub statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HubStats:
    changes: int
    last_change_n: Optional[int]   # first checkpoint at/ by which the final
                                   # leadership change had happened


def hub_report(traj: Trajectory) -> tuple[HubStats, ...]:
    """Per-type leadership-change totals and last-change positions."""
    T = traj.params.num_types
    out = []
    for t in range(T):
        final_changes = traj.rows[-1].leadership_changes_by_type[t]
        if final_changes == 0:
            out.append(HubStats(0, None))
            continue
        n_last = next(
            row.n for row in traj.rows if row.leadership_changes_by_type[t] == final_changes
        )
        out.append(HubStats(final_changes, n_last))
    return tuple(out)


def leadership_changes_after(traj: Trajectory, n0: int) -> tuple[int, ...]:
    """Per-type leadership changes after the last checkpoint at or before n0."""
    base = None
    for row in traj.rows:
        if row.n <= n0:
            base = row
        else:
            break
    if base is None:
        raise InsufficientData(f"no checkpoint at or before n={n0}")
    final = traj.rows[-1]
    return tuple(
        f - b
        for f, b in zip(final.leadership_changes_by_type, base.leadership_changes_by_type)
    )


# ---------------------------------------------------------------------------
# run summaries (the JSON object written next to every trajectory)
# ---------------------------------------------------------------------------

def predicted_by_type(summary: TheorySummary, num_types: int) -> list[float]:
    if summary.regime is Regime.SUPERCRITICAL:
        return list(summary.condensate_fraction_by_type)
    if summary.regime is Regime.CRITICAL:
        return list(summary.critical_constant_by_type)
    return [summary.subcritical_exponent] * num_types


def run_summary(traj: Trajectory, summary: Optional[TheorySummary] = None) -> dict:
    """Summary object: params, seed, regime, rho, x_star, predicted,
    estimated, hub."""
    if summary is None:
        summary = classify_regime(traj.params)
    try:
        estimate = estimate_regime_statistic(traj, summary)
        estimated = list(estimate.value_by_type)
        statistic = estimate.statistic
    except InsufficientData:
        estimated = None
        statistic = None
    hub = hub_report(traj)
    params = params_to_dict(traj.params)
    params["n"] = traj.n_steps
    return {
        "params": params,
        "seed": traj.seed,
        "regime": summary.regime.value,
        "rho": summary.rho,
        "x_star": summary.x_star,
        "predicted": predicted_by_type(summary, traj.params.num_types),
        "estimated": estimated,
        "statistic": statistic,
        "hub": [
            {"changes": h.changes, "last_change_n": h.last_change_n} for h in hub
        ],
    }


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def derive_run_seed(root_seed: int, cell_index: int, replicate: int) -> int:
    """Per-run seed: first 8 bytes of SHA-256 over "root:cell:replicate"."""
    digest = hashlib.sha256(f"{root_seed}:{cell_index}:{replicate}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class SweepResult:
    cell_index: int
    replicate: int
    seed: int
    trajectory: Optional[Trajectory]
    summary: Optional[dict]
    runtime_s: float
    error: Optional[str]


def _execute_job(job):
    ci, ri, config = job
    t0 = time.perf_counter()
    try:
        traj = run(config)
        return ci, ri, config.seed, traj, time.perf_counter() - t0, None
    except Exception as exc:  # per-run failures must not sink the sweep
        return ci, ri, config.seed, None, time.perf_counter() - t0, f"{type(exc).__name__}: {exc}"


def sweep(
    grid: Sequence[ModelParams],
    n_steps: int,
    root_seed: int,
    replicates: int,
    checkpoints: CheckpointSpec = None,
    jobs: Optional[int] = None,
    rebuild_interval: int = DEFAULT_REBUILD_INTERVAL,
) -> list[SweepResult]:
    """Run every (cell, replicate) combination; order- and parallelism-
    independent results (summaries carry no timing)."""
    if replicates < 1:
        raise ValueError("need at least one replicate")
    job_list = []
    for ci, params in enumerate(grid):
        for ri in range(replicates):
            seed = derive_run_seed(root_seed, ci, ri)
            job_list.append(
                (ci, ri, RunConfig(params, n_steps, seed, checkpoints, rebuild_interval))
            )
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs <= 1 or len(job_list) == 1:
        raw = [_execute_job(j) for j in job_list]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            raw = list(pool.map(_execute_job, job_list))
    raw.sort(key=lambda r: (r[0], r[1]))
    results = []
    for ci, ri, seed, traj, dt, err in raw:
        summary = None
        if traj is not None:
            summary = run_summary(traj)
            summary["cell_index"] = ci
            summary["replicate"] = ri
        results.append(SweepResult(ci, ri, seed, traj, summary, dt, err))
    return results
