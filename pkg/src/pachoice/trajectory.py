"""Run records and their on-disk forms.

A trajectory is the sequence of per-checkpoint aggregate snapshots of one
run, together with the run's parameters and seed.  The CSV layout is one
row per (checkpoint, type):

    n,type,max_degree,leader_id,D_i,N_i,leadership_changes,total_degree

with 1-based type ids and leader ids (0 = the type has no vertices yet),
floats printed with 12 significant digits, UTF-8, LF line endings.  Files
are written atomically (temp file + rename).
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from typing import Optional

from .model import EdgeWeighting, ModelParams, new_params

CSV_HEADER = "n,type,max_degree,leader_id,D_i,N_i,leadership_changes,total_degree"


@dataclass(frozen=True)
class CheckpointRow:
    n: int
    max_degree_by_type: tuple[int, ...]
    leader_by_type: tuple[Optional[int], ...]
    D_by_type: tuple[float, ...]
    counts_by_type: tuple[int, ...]
    leadership_changes_by_type: tuple[int, ...]
    total_degree: int

    @classmethod
    def from_state(cls, state) -> "CheckpointRow":
        return cls(
            n=state.n,
            max_degree_by_type=tuple(state.max_degree_by_type),
            leader_by_type=tuple(state.leader_by_type),
            D_by_type=tuple(state.D_by_type),
            counts_by_type=tuple(state.counts_by_type),
            leadership_changes_by_type=tuple(state.leadership_changes_by_type),
            total_degree=state.total_degree,
        )


@dataclass(frozen=True)
class Trajectory:
    params: ModelParams
    n_steps: int
    seed: int
    rows: tuple[CheckpointRow, ...]

    @property
    def final(self) -> CheckpointRow:
        return self.rows[-1]


# ---- parameter (de)serialization -------------------------------------------

def params_to_dict(params: ModelParams) -> dict:
    """Flag-named flat dict mirroring the CLI surface."""
    return {
        "m": params.m,
        "k": params.k,
        "d": params.d,
        "T": params.num_types,
        "beta": params.beta,
        "p": list(params.type_probs),
        "self_loops": params.initial_self_loops,
        "edge_weighting": params.edge_weighting.value,
    }


def params_from_dict(data: dict) -> ModelParams:
    return new_params(
        m=data["m"],
        k=data["k"],
        d=data["d"],
        T=data.get("T", 1),
        beta=data.get("beta", 0.0),
        type_probs=data.get("p"),
        initial_self_loops=data.get("self_loops"),
        edge_weighting=data.get("edge_weighting", EdgeWeighting.POST_VERTEX),
    )


# ---- CSV / JSON writers ------------------------------------------------------

def _fmt(x: float) -> str:
    return format(x, ".12g")


def trajectory_csv_bytes(traj: Trajectory) -> bytes:
    lines = [CSV_HEADER]
    T = traj.params.num_types
    for row in traj.rows:
        for t in range(T):
            leader = row.leader_by_type[t]
            lines.append(
                f"{row.n},{t + 1},{row.max_degree_by_type[t]},"
                f"{0 if leader is None else leader + 1},"
                f"{_fmt(row.D_by_type[t])},{row.counts_by_type[t]},"
                f"{row.leadership_changes_by_type[t]},{row.total_degree}"
            )
    return ("\n".join(lines) + "\n").encode("utf-8")


def trajectory_meta_dict(traj: Trajectory) -> dict:
    return {"params": params_to_dict(traj.params), "n": traj.n_steps, "seed": traj.seed}


def atomic_write_bytes(path: str | os.PathLike, data: bytes) -> None:
    """Write via a temp file in the destination directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def json_bytes(obj) -> bytes:
    """Deterministic JSON encoding (sorted keys, stable separators)."""
    return (json.dumps(obj, sort_keys=True, indent=2) + "\n").encode("utf-8")


def save_trajectory(traj: Trajectory, csv_path, meta_path=None) -> None:
    atomic_write_bytes(csv_path, trajectory_csv_bytes(traj))
    if meta_path is not None:
        atomic_write_bytes(meta_path, json_bytes(trajectory_meta_dict(traj)))


def load_trajectory(csv_path, meta_path) -> Trajectory:
    with open(meta_path, "rb") as fh:
        meta = json.loads(fh.read().decode("utf-8"))
    params = params_from_dict(meta["params"])
    T = params.num_types
    with open(csv_path, "rb") as fh:
        text = fh.read().decode("utf-8")
    lines = [ln for ln in text.split("\n") if ln]
    if lines[0] != CSV_HEADER:
        raise ValueError(f"unexpected CSV header: {lines[0]!r}")
    per_n: dict[int, dict[int, tuple]] = {}
    order: list[int] = []
    for ln in lines[1:]:
        parts = ln.split(",")
        n = int(parts[0])
        t = int(parts[1]) - 1
        if n not in per_n:
            per_n[n] = {}
            order.append(n)
        per_n[n][t] = (
            int(parts[2]),
            None if int(parts[3]) == 0 else int(parts[3]) - 1,
            float(parts[4]),
            int(parts[5]),
            int(parts[6]),
            int(parts[7]),
        )
    rows = []
    for n in order:
        cols = per_n[n]
        if sorted(cols) != list(range(T)):
            raise ValueError(f"checkpoint n={n} is missing type rows")
        rows.append(
            CheckpointRow(
                n=n,
                max_degree_by_type=tuple(cols[t][0] for t in range(T)),
                leader_by_type=tuple(cols[t][1] for t in range(T)),
                D_by_type=tuple(cols[t][2] for t in range(T)),
                counts_by_type=tuple(cols[t][3] for t in range(T)),
                leadership_changes_by_type=tuple(cols[t][4] for t in range(T)),
                total_degree=cols[0][5],
            )
        )
    return Trajectory(params=params, n_steps=meta["n"], seed=meta["seed"], rows=tuple(rows))
