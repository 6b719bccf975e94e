"""Step engine: single steps, full runs, checkpoint recording.

One step grows the graph from n to n+1 vertices:

  (a) the new vertex gets an i.i.d. type;
  (b) vertex step: m endpoints drawn independently, proportional to
      weight (degree + beta), all against the weights of the pre-step
      graph (frozen); each edge adds one degree to its endpoint and one
      to the new vertex;
  (c) the new vertex joins the sampling index with weight m + beta;
  (d) edge step: k pairs (w, u) drawn independently; w uniform over all
      current vertices; u is the maximum-degree member of a d-sample
      drawn weight-proportionally from w's type with w excluded (from
      all vertices except w if w is its type's only vertex); ties are
      broken uniformly over tied sample positions; all k pairs sample
      against one frozen snapshot (post- or pre-vertex-step, per
      ``EdgeWeighting``), and degree comparisons use that same snapshot;
  (e) updates are applied in canonical order: vertex-step targets in
      draw order, the new vertex, then pair endpoints in pair order.

Randomness is consumed in a fixed documented order (one uniform for the
type only when there are >= 2 types; one uniform per weighted draw; one
``randrange`` per pair source; one ``randrange`` per tie-break only when
at least two sample positions tie), which makes runs reproducible and
lets the optimized loop in :func:`run` be verified bit-for-bit against
the readable :func:`do_step` path (:func:`run_reference`).
"""

from __future__ import annotations

import gc
import random
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .model import (
    EdgeWeighting,
    GraphState,
    ModelParams,
    StepOutcome,
    draw_type,
    initial_state,
)
from .sampler import DEFAULT_REBUILD_INTERVAL, WeightIndex, _tree_build
from .trajectory import CheckpointRow, Trajectory


@dataclass(frozen=True)
class GeometricSchedule:
    """Checkpoints at round(start * factor**j), plus the final step count."""

    start: int = 100
    factor: float = 10.0 ** 0.25


CheckpointSpec = Union[GeometricSchedule, Sequence[int], None]


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    n_steps: int                      # total vertex count at the end of the run
    seed: int
    checkpoints: CheckpointSpec = None
    rebuild_interval: int = DEFAULT_REBUILD_INTERVAL


def resolve_checkpoints(n_steps: int, schedule: CheckpointSpec = None) -> list[int]:
    """Concrete sorted checkpoint list for a run of ``n_steps`` vertices.

    A geometric schedule always includes the final vertex count; an explicit
    list is used as given (must be strictly increasing, within range).
    """
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    if schedule is None:
        schedule = GeometricSchedule()
    if isinstance(schedule, GeometricSchedule):
        if schedule.factor <= 1.0:
            raise ValueError("geometric factor must exceed 1")
        if schedule.start < 1:
            raise ValueError("geometric start must be at least 1")
        pts: list[int] = []
        x = float(schedule.start)
        while True:
            v = round(x)
            if v >= n_steps:
                break
            if v >= 1 and (not pts or v > pts[-1]):
                pts.append(v)
            x *= schedule.factor
        pts.append(n_steps)
        return pts
    pts = [int(v) for v in schedule]
    if not pts:
        raise ValueError("checkpoint list must not be empty")
    if any(v < 1 for v in pts) or any(b <= a for a, b in zip(pts, pts[1:])):
        raise ValueError("checkpoints must be strictly increasing positive integers")
    if pts[-1] > n_steps:
        raise ValueError("checkpoints must not exceed n_steps")
    return pts


# ---------------------------------------------------------------------------
# reference step
# ---------------------------------------------------------------------------

def _draw_pairs(state, index, params, rng, new_vid, tau, pre, count):
    """Draw the k edge-step pairs against the current (frozen) snapshot.

    In post mode the new vertex is already in ``state`` and ``index``; in
    pre mode it exists only as id ``new_vid`` with type ``tau`` and cannot
    be a sample member.  ``state.degrees`` holds the comparison snapshot in
    both modes because degree updates are deferred by the caller.
    """
    d = params.d
    degrees = state.degrees
    pairs = []
    fallbacks = 0
    for _ in range(params.k):
        w = rng.randrange(count)
        if pre and w == new_vid:
            tw = tau
            if index.type_count(tw) >= 1:
                ys = index.sample_type_many(tw, d, rng)
            else:
                fallbacks += 1
                ys = index.sample_global_many(d, rng)
        else:
            tw = state.types[w]
            if index.type_count(tw) >= 2:
                ys = index.sample_type_excluding_many(tw, w, d, rng)
            elif len(index) >= 2:
                fallbacks += 1
                ys = index.sample_global_excluding_many(w, d, rng)
            else:
                # pre mode from a single-vertex graph: the new vertex is the
                # only possible partner
                fallbacks += 1
                pairs.append((w, new_vid))
                continue
        best = -1
        positions: list[int] = []
        for i, y in enumerate(ys):
            dy = degrees[y]
            if dy > best:
                best = dy
                positions = [i]
            elif dy == best:
                positions.append(i)
        if len(positions) == 1:
            u = ys[positions[0]]
        else:
            u = ys[positions[rng.randrange(len(positions))]]
        pairs.append((w, u))
    return pairs, fallbacks


def do_step(state: GraphState, index: WeightIndex, params: ModelParams, rng) -> StepOutcome:
    """Execute one full step, mutating ``state`` and ``index`` in place."""
    n0 = state.n
    m, beta = params.m, params.beta
    pre = params.edge_weighting is EdgeWeighting.PRE_VERTEX
    tau = 0 if params.num_types == 1 else draw_type(params.type_probs, rng.random())

    targets = [index.sample_global(rng) for _ in range(m)]

    if pre:
        pairs, fallbacks = _draw_pairs(state, index, params, rng, n0, tau, True, n0 + 1)

    for v in targets:
        state.add_degree(v, 1)
        index.add_weight(v, 1.0)
    new_vid = state.add_vertex(tau, m)
    index.insert_vertex(new_vid, tau, m + beta)

    if not pre:
        pairs, fallbacks = _draw_pairs(state, index, params, rng, new_vid, tau, False, n0 + 1)

    for w, u in pairs:
        state.add_degree(w, 1)
        index.add_weight(w, 1.0)
        state.add_degree(u, 1)
        index.add_weight(u, 1.0)

    return StepOutcome(
        new_vertex=new_vid,
        new_vertex_type=tau,
        vertex_step_targets=tuple(targets),
        edge_step_pairs=tuple(pairs),
        edge_fallback_count=fallbacks,
    )


# ---------------------------------------------------------------------------
# full runs
# ---------------------------------------------------------------------------

def _setup(config: RunConfig):
    if config.n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    checkpoints = resolve_checkpoints(config.n_steps, config.checkpoints)
    rng = random.Random(config.seed)
    state = initial_state(config.params, rng)
    index = WeightIndex.from_state(state, rebuild_interval=config.rebuild_interval)
    return rng, state, index, checkpoints


def run_reference(config: RunConfig) -> Trajectory:
    """Readable run loop over :func:`do_step`; the oracle for :func:`run`."""
    rng, state, index, checkpoints = _setup(config)
    rows = []
    ci = 0
    if checkpoints[ci] == 1:
        rows.append(CheckpointRow.from_state(state))
        ci += 1
    while state.n < config.n_steps:
        do_step(state, index, config.params, rng)
        if ci < len(checkpoints) and state.n == checkpoints[ci]:
            rows.append(CheckpointRow.from_state(state))
            ci += 1
    return Trajectory(
        params=config.params, n_steps=config.n_steps, seed=config.seed, rows=tuple(rows)
    )


def run(config: RunConfig) -> Trajectory:
    """Run to ``n_steps`` vertices, recording every checkpoint.

    Deterministic: the same seed and configuration always produce an
    identical trajectory.  The default (post-vertex) weighting uses an
    optimized loop that is RNG-compatible with, and tested bit-identical
    against, :func:`run_reference`; the pre-vertex variant uses the
    reference loop directly.
    """
    if config.params.edge_weighting is EdgeWeighting.PRE_VERTEX:
        return run_reference(config)
    rng, state, index, checkpoints = _setup(config)
    was_enabled = gc.isenabled()
    if was_enabled:
        gc.disable()   # long runs: collector pauses dominate otherwise
    try:
        rows = _run_fast_post(state, index, config.params, rng, config.n_steps, checkpoints)
    finally:
        if was_enabled:
            gc.enable()
    return Trajectory(
        params=config.params, n_steps=config.n_steps, seed=config.seed, rows=tuple(rows)
    )


_MASK_TUPLES: dict[int, tuple[int, ...]] = {}


def _masks_for(cap: int) -> tuple[int, ...]:
    """Descent masks (cap/2, cap/4, ..., 1), memoized per capacity."""
    masks = _MASK_TUPLES.get(cap)
    if masks is None:
        out = []
        mask = cap >> 1
        while mask:
            out.append(mask)
            mask >>= 1
        masks = tuple(out)
        _MASK_TUPLES[cap] = masks
    return masks


def _run_fast_post(state, index, params, rng, n_steps, checkpoints):
    """Inlined hot loop for the post-vertex weighting.

    Mirrors do_step / WeightIndex arithmetic operation-for-operation (same
    float op order, same RNG consumption), with Fenwick descents and point
    updates expanded inline and all mutable structures bound to locals.
    """
    m, k, d, T, beta = params.m, params.k, params.d, params.num_types, params.beta
    probs = params.type_probs
    wnew = m + beta

    degrees = state.degrees
    types = state.types
    counts = state.counts_by_type
    degsum = state.degree_sum_by_type
    maxdeg = state.max_degree_by_type
    leader = state.leader_by_type
    changes = state.leadership_changes_by_type
    total_degree = state.total_degree

    weights = index._weights
    vtype = index._vtype
    vslot = index._vslot
    members = index._members
    trees = index._trees
    caps = index._caps
    sizes = index._sizes
    mask_lists = [_masks_for(c) for c in caps]
    ttotals = index._type_totals
    gtotal = index._total
    interval = index._rebuild_interval
    ops_left = interval - index._ops

    rnd = rng.random
    rr = rng.randrange

    rows = []
    ci = 0
    ncp = len(checkpoints)
    if checkpoints[0] == 1:
        rows.append(CheckpointRow.from_state(state))
        ci = 1
    next_cp = checkpoints[ci] if ci < ncp else -1

    n0 = len(degrees)
    targets = [0] * m
    while n0 < n_steps:
        # (a) type of the new vertex
        if T == 1:
            tau = 0
        else:
            u = rnd()
            acc = 0.0
            tau = T - 1
            for ti in range(T):
                acc += probs[ti]
                if u < acc:
                    tau = ti
                    break

        # (b) vertex step: m draws against frozen pre-step weights
        for a in range(m):
            r = rnd() * gtotal
            if T == 1:
                # the single type's total tracks the global total exactly,
                # so the type scan can never pick anything else
                t = 0
            else:
                t = -1
                for ti in range(T):
                    tt = ttotals[ti]
                    if r < tt:
                        t = ti
                        break
                    r -= tt
                if t < 0 or sizes[t] == 0:
                    for ti in range(T - 1, -1, -1):
                        if sizes[ti]:
                            t = ti
                            r = ttotals[ti]
                            break
            tree = trees[t]
            i = 0
            for mask in mask_lists[t]:
                j = i + mask
                tv = tree[j]
                if r >= tv:
                    r -= tv
                    i = j
            st = sizes[t]
            if i >= st:
                i = st - 1
            targets[a] = members[t][i]

        for a in range(m):
            v = targets[a]
            tv = types[v]
            deg = degrees[v] + 1
            degrees[v] = deg
            degsum[tv] += 1
            total_degree += 1
            if deg > maxdeg[tv]:
                maxdeg[tv] = deg
                if leader[tv] != v:
                    if leader[tv] is not None:
                        changes[tv] += 1
                    leader[tv] = v
            weights[v] += 1.0
            tree = trees[tv]
            cp = caps[tv]
            j = vslot[v] + 1
            while j <= cp:
                tree[j] += 1.0
                j += j & -j
            ttotals[tv] += 1.0
            gtotal += 1.0
            ops_left -= 1
            if ops_left <= 0:
                index._total = gtotal
                index.rebuild()
                gtotal = index._total
                ops_left = interval

        # (c) insert the new vertex with weight m + beta
        new_vid = n0
        degrees.append(m)
        types.append(tau)
        counts[tau] += 1
        degsum[tau] += m
        total_degree += m
        if m > maxdeg[tau]:
            maxdeg[tau] = m
            if leader[tau] is not None:
                changes[tau] += 1
            leader[tau] = new_vid
        elif leader[tau] is None:
            leader[tau] = new_vid
        slot = sizes[tau]
        if slot == caps[tau]:
            cap2 = caps[tau] * 2
            vals = [weights[vv] for vv in members[tau]]
            trees[tau] = _tree_build(vals, cap2)
            caps[tau] = cap2
            mask_lists[tau] = _masks_for(cap2)
        weights.append(wnew)
        vtype.append(tau)
        vslot.append(slot)
        members[tau].append(new_vid)
        sizes[tau] = slot + 1
        tree = trees[tau]
        cp = caps[tau]
        j = slot + 1
        while j <= cp:
            tree[j] += wnew
            j += j & -j
        ttotals[tau] += wnew
        gtotal += wnew
        ops_left -= 1
        if ops_left <= 0:
            index._total = gtotal
            index.rebuild()
            gtotal = index._total
            ops_left = interval

        # (d) edge step: k pairs against the frozen post-vertex snapshot
        count = n0 + 1
        pairs = []
        for _ in range(k):
            w = rr(count)
            tw = types[w]
            size_tw = sizes[tw]
            if size_tw >= 2:
                exc_slot = vslot[w]
                wexc = weights[w]
                tree = trees[tw]
                masks = mask_lists[tw]
                s = 0.0
                j = exc_slot
                while j > 0:
                    s += tree[j]
                    j &= j - 1
                cum_before = s
                tot = ttotals[tw] - wexc
                mem = members[tw]
                ys = []
                for _ in range(d):
                    r = rnd() * tot
                    if r >= cum_before:
                        r += wexc
                    i = 0
                    for mask in masks:
                        jj = i + mask
                        tv = tree[jj]
                        if r >= tv:
                            r -= tv
                            i = jj
                    if i >= size_tw:
                        i = size_tw - 1
                    if i == exc_slot:
                        i = exc_slot + 1 if exc_slot + 1 < size_tw else exc_slot - 1
                    ys.append(mem[i])
            else:
                index._total = gtotal
                ys = index.sample_global_excluding_many(w, d, rng)
            best = -1
            positions = []
            for ii in range(d):
                dy = degrees[ys[ii]]
                if dy > best:
                    best = dy
                    positions = [ii]
                elif dy == best:
                    positions.append(ii)
            if len(positions) == 1:
                uv = ys[positions[0]]
            else:
                uv = ys[positions[rr(len(positions))]]
            pairs.append((w, uv))

        # (e) apply the pair updates in order
        for w, uv in pairs:
            for v in (w, uv):
                tv = types[v]
                deg = degrees[v] + 1
                degrees[v] = deg
                degsum[tv] += 1
                total_degree += 1
                if deg > maxdeg[tv]:
                    maxdeg[tv] = deg
                    if leader[tv] != v:
                        if leader[tv] is not None:
                            changes[tv] += 1
                        leader[tv] = v
                weights[v] += 1.0
                tree = trees[tv]
                cp = caps[tv]
                j = vslot[v] + 1
                while j <= cp:
                    tree[j] += 1.0
                    j += j & -j
                ttotals[tv] += 1.0
                gtotal += 1.0
                ops_left -= 1
                if ops_left <= 0:
                    index._total = gtotal
                    index.rebuild()
                    gtotal = index._total
                    ops_left = interval

        n0 += 1
        if n0 == next_cp:
            state.total_degree = total_degree
            rows.append(CheckpointRow.from_state(state))
            ci += 1
            next_cp = checkpoints[ci] if ci < ncp else -1

    state.total_degree = total_degree
    index._total = gtotal
    index._ops = interval - ops_left
    return rows
