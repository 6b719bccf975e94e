"""Exact one-step expectations for small states, by full enumeration.

Enumerates, with exact probabilities: the new vertex's type, every ordered
tuple of vertex-step targets, and for the edge step every (source, target)
pair outcome -- the latter obtained by summing over all d-tuples of sample
members with the max/tie-break rule applied fractionally.  Because the k
pairs of one step are i.i.d. given the frozen snapshot, their joint law is
the k-fold product of the single-pair law, which keeps the enumeration
polynomial while staying exact for both the per-type weight increment and
the per-type maximum-degree increment.

This is the independent cross-check for the simulator's one-step
distribution: Monte-Carlo replays of ``do_step`` from a fixed state must
reproduce these expectations within statistical error.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from itertools import product

from .errors import TooLargeForOracle
from .model import EdgeWeighting, GraphState, ModelParams
from .process import do_step
from .sampler import WeightIndex

DEFAULT_ENUM_LIMIT = 50_000_000


@dataclass(frozen=True)
class StepExpectation:
    """Exact conditional expectations of one step's per-type increments."""

    dD_by_type: tuple[float, ...]   # weight totals
    dM_by_type: tuple[float, ...]   # maximum degrees


def pair_outcome_distribution(
    state: GraphState,
    params: ModelParams,
    new_type: int,
    vertex_step_targets: tuple[int, ...] = (),
) -> dict[tuple[int, int], float]:
    """Exact law of one edge-step pair (w, u) given the frozen snapshot.

    ``vertex_step_targets`` fixes the realized vertex-step draws (ordered,
    possibly repeating); for the pre-vertex weighting they only matter to
    the caller, not to the sampling weights.
    """
    n = state.n
    beta = params.beta
    d = params.d
    pre = params.edge_weighting is EdgeWeighting.PRE_VERTEX
    count = n + 1

    snap = list(state.degrees)
    for t in vertex_step_targets:
        snap[t] += 1
    snap.append(params.m)
    types_ext = list(state.types) + [new_type]

    if pre:
        sample_deg = state.degrees
        eligible = range(n)
    else:
        sample_deg = snap
        eligible = range(n + 1)

    dist: dict[tuple[int, int], float] = {}
    p_w = 1.0 / count
    for w in range(count):
        tw = types_ext[w]
        pool = [j for j in eligible if j != w and types_ext[j] == tw]
        if not pool:
            pool = [j for j in eligible if j != w]
        if not pool:
            # pre weighting from a single-vertex graph: partner is the new vertex
            key = (w, n)
            dist[key] = dist.get(key, 0.0) + p_w
            continue
        wts = [sample_deg[j] + beta for j in pool]
        Z = math.fsum(wts)
        if not Z > 0.0:
            raise ValueError("sample pool carries no positive weight")
        for tup in product(range(len(pool)), repeat=d):
            p_t = p_w
            for idx in tup:
                p_t *= wts[idx] / Z
            if p_t == 0.0:
                continue
            best = -1
            positions: list[int] = []
            for i, idx in enumerate(tup):
                dy = sample_deg[pool[idx]]
                if dy > best:
                    best = dy
                    positions = [i]
                elif dy == best:
                    positions.append(i)
            share = p_t / len(positions)
            for i in positions:
                key = (w, pool[tup[i]])
                dist[key] = dist.get(key, 0.0) + share
    return dist


def expectation_oracle(
    state: GraphState, params: ModelParams, limit: int = DEFAULT_ENUM_LIMIT
) -> StepExpectation:
    """Exact per-type expectations of the one-step increments of the weight
    totals and the maximum degrees, conditional on ``state``."""
    n = state.n
    T = params.num_types
    m, k, beta = params.m, params.k, params.beta
    if n < 1:
        raise ValueError("state must contain at least one vertex")
    pool_max = n if params.edge_weighting is EdgeWeighting.PRE_VERTEX else n + 1
    cost = T * (n**m) * ((n + 1) * (pool_max**params.d) + (n + 1) ** (2 * k))
    if cost > limit:
        raise TooLargeForOracle(f"enumeration cost ~{cost} exceeds limit {limit}")

    W = state.total_degree + beta * n
    weights_gn = [deg + beta for deg in state.degrees]
    if not W > 0.0:
        raise ValueError("state has no positive total weight")
    M_before = list(state.max_degree_by_type)
    types = state.types

    dD = [0.0] * T
    dM = [0.0] * T

    for tau in range(T):
        p_tau = params.type_probs[tau]
        if p_tau == 0.0:
            continue
        for targets in product(range(n), repeat=m):
            p_vs = p_tau
            for t in targets:
                p_vs *= weights_gn[t] / W
            if p_vs == 0.0:
                continue

            snap = list(state.degrees)
            for t in targets:
                snap[t] += 1
            snap.append(m)
            types_ext = types + [tau]

            # vertex-step + new-vertex contribution to the weight totals
            base_dD = [0.0] * T
            for t in targets:
                base_dD[types[t]] += 1.0
            base_dD[tau] += m + beta

            # per-type max after the vertex step (the new vertex included)
            snap_max = list(M_before)
            for t in set(targets):
                tt = types[t]
                if snap[t] > snap_max[tt]:
                    snap_max[tt] = snap[t]
            if m > snap_max[tau]:
                snap_max[tau] = m

            if k == 0:
                for t2 in range(T):
                    dD[t2] += p_vs * base_dD[t2]
                    dM[t2] += p_vs * (snap_max[t2] - M_before[t2])
                continue

            pair_items = list(
                pair_outcome_distribution(state, params, tau, targets).items()
            )
            for combo in product(pair_items, repeat=k):
                p_all = p_vs
                for _, pp in combo:
                    p_all *= pp
                if p_all == 0.0:
                    continue
                incr: dict[int, int] = {}
                edge_dD = list(base_dD)
                for (w, u), _ in combo:
                    incr[w] = incr.get(w, 0) + 1
                    incr[u] = incr.get(u, 0) + 1
                    edge_dD[types_ext[w]] += 1.0
                    edge_dD[types_ext[u]] += 1.0
                final_max = list(snap_max)
                for v, c in incr.items():
                    tt = types_ext[v]
                    deg = snap[v] + c
                    if deg > final_max[tt]:
                        final_max[tt] = deg
                for t2 in range(T):
                    dD[t2] += p_all * edge_dD[t2]
                    dM[t2] += p_all * (final_max[t2] - M_before[t2])

    return StepExpectation(dD_by_type=tuple(dD), dM_by_type=tuple(dM))


@dataclass(frozen=True)
class MonteCarloStep:
    """Replay averages of one-step increments, with standard errors."""

    dD_mean: tuple[float, ...]
    dD_se: tuple[float, ...]
    dM_mean: tuple[float, ...]
    dM_se: tuple[float, ...]
    replays: int


def monte_carlo_step(
    state: GraphState, params: ModelParams, replays: int, seed: int
) -> MonteCarloStep:
    """Replay ``do_step`` from a fixed state and average the increments."""
    T = params.num_types
    rng = random.Random(seed)
    ds_before = list(state.degree_sum_by_type)
    cn_before = list(state.counts_by_type)
    mx_before = list(state.max_degree_by_type)
    beta = params.beta

    sum_d = [0.0] * T
    sq_d = [0.0] * T
    sum_m = [0.0] * T
    sq_m = [0.0] * T
    for _ in range(replays):
        st = state.copy()
        idx = WeightIndex.from_state(st)
        do_step(st, idx, params, rng)
        for t in range(T):
            dd = (st.degree_sum_by_type[t] - ds_before[t]) + beta * (
                st.counts_by_type[t] - cn_before[t]
            )
            dm = st.max_degree_by_type[t] - mx_before[t]
            sum_d[t] += dd
            sq_d[t] += dd * dd
            sum_m[t] += dm
            sq_m[t] += dm * dm

    def finish(s, q):
        mean = [si / replays for si in s]
        se = []
        for si, qi, mi in zip(s, q, mean):
            var = max(qi / replays - mi * mi, 0.0)
            se.append(math.sqrt(var / replays))
        return tuple(mean), tuple(se)

    dmean, dse = finish(sum_d, sq_d)
    mmean, mse = finish(sum_m, sq_m)
    return MonteCarloStep(dmean, dse, mmean, mse, replays)
