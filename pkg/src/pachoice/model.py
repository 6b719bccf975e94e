"""Core domain types: model parameters and evolving graph state.

The process grows a multigraph over typed vertices.  Every vertex carries
sampling weight ``degree + beta``.  Per-type aggregates (vertex counts,
integer degree sums, maximum degrees, current degree leaders) are maintained
incrementally; per-type weight totals are derived on demand as
``degree_sum + beta * count`` so long runs never accumulate float drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .errors import BadCounts, BadProbs, BadSampleSize, BetaOutOfRange

PROB_SUM_TOL = 1e-12


class EdgeWeighting(str, Enum):
    """Which weight snapshot the edge-step samples are drawn against.

    POST_VERTEX (default): the new vertex and the vertex-step degree
    increments are part of the snapshot; all k pairs of one step sample
    against it and compare degrees on it.

    PRE_VERTEX: samples are drawn against the weights of the graph before
    the step (the new vertex is not eligible as a sample member, though it
    can still be the uniformly chosen pair source); degree comparisons use
    the same pre-step snapshot.
    """

    POST_VERTEX = "post"
    PRE_VERTEX = "pre"


@dataclass(frozen=True)
class ModelParams:
    """Validated parameter set.  Build through :func:`new_params`."""

    m: int                      # edges per vertex step
    k: int                      # pairs per edge step
    d: int                      # choice sample size
    num_types: int
    beta: float                 # weight offset, > -1
    type_probs: tuple[float, ...]
    initial_self_loops: int     # self-loops on the seed vertex
    edge_weighting: EdgeWeighting = EdgeWeighting.POST_VERTEX

    @property
    def total_weight_rate(self) -> float:
        """Weight added per step: 2m + 2k + beta."""
        return 2 * self.m + 2 * self.k + self.beta


def new_params(
    m: int,
    k: int,
    d: int,
    T: int = 1,
    beta: float = 0.0,
    type_probs: Optional[Sequence[float]] = None,
    *,
    initial_self_loops: Optional[int] = None,
    edge_weighting: EdgeWeighting | str = EdgeWeighting.POST_VERTEX,
) -> ModelParams:
    """Validate raw inputs and return an immutable :class:`ModelParams`.

    Raises :class:`BadCounts`, :class:`BadSampleSize`, :class:`BetaOutOfRange`
    or :class:`BadProbs` on violation.  ``initial_self_loops`` defaults to
    ``m`` so every vertex ever created has weight at least ``1 + beta > 0``;
    zero self-loops are allowed only for ``beta > 0`` (otherwise the seed
    vertex would carry weight <= 0 and the first vertex step would be
    undefined).
    """
    if int(m) != m or int(k) != k or int(T) != T:
        raise BadCounts(f"m, k and T must be integers, got m={m!r} k={k!r} T={T!r}")
    m, k, T = int(m), int(k), int(T)
    if m < 1 or k < 1 or T < 1:
        raise BadCounts(f"need m >= 1, k >= 1, T >= 1, got m={m} k={k} T={T}")
    if int(d) != d:
        raise BadSampleSize(f"d must be an integer, got {d!r}")
    d = int(d)
    if d < 2:
        raise BadSampleSize(f"choice sample size d must be at least 2, got {d}")
    beta = float(beta)
    if not beta > -1.0:
        raise BetaOutOfRange(f"beta must satisfy beta > -1 (strict), got {beta}")

    if type_probs is None:
        probs = tuple(1.0 / T for _ in range(T))
    else:
        probs = tuple(float(p) for p in type_probs)
    if len(probs) != T:
        raise BadProbs(f"expected {T} type probabilities, got {len(probs)}")
    if T == 1:
        if probs != (1.0,):
            raise BadProbs(f"single-type probability vector must be [1.0], got {list(probs)}")
    else:
        for p in probs:
            if not 0.0 < p < 1.0:
                raise BadProbs(f"type probabilities must lie in (0, 1), got {p}")
        if abs(math.fsum(probs) - 1.0) > PROB_SUM_TOL:
            raise BadProbs(f"type probabilities sum to {math.fsum(probs)!r}, not 1")

    if initial_self_loops is None:
        initial_self_loops = m
    if int(initial_self_loops) != initial_self_loops or initial_self_loops < 0:
        raise BadCounts(f"initial_self_loops must be a nonnegative integer, got {initial_self_loops!r}")
    initial_self_loops = int(initial_self_loops)
    if initial_self_loops == 0 and beta <= 0.0:
        raise BetaOutOfRange(
            "initial_self_loops=0 requires beta > 0: the seed vertex would otherwise "
            "carry nonpositive sampling weight"
        )

    if not isinstance(edge_weighting, EdgeWeighting):
        edge_weighting = EdgeWeighting(edge_weighting)

    return ModelParams(
        m=m, k=k, d=d, num_types=T, beta=beta, type_probs=probs,
        initial_self_loops=initial_self_loops, edge_weighting=edge_weighting,
    )


def draw_type(type_probs: Sequence[float], u: float) -> int:
    """Map a uniform variate in [0, 1) to a 0-based type id."""
    acc = 0.0
    last = len(type_probs) - 1
    for i, p in enumerate(type_probs):
        acc += p
        if u < acc:
            return i
    return last


@dataclass(slots=True)
class GraphState:
    """Degrees, types and per-type aggregates of the evolving graph.

    Weight totals are not stored: ``D_by_type[i] = degree_sum_by_type[i]
    + beta * counts_by_type[i]`` exactly, at any time.  The degree leader of
    a type changes only when another vertex strictly exceeds the current
    maximum; ties never count as a leadership change.
    """

    beta: float
    num_types: int
    degrees: list[int] = field(default_factory=list)
    types: list[int] = field(default_factory=list)
    counts_by_type: list[int] = field(default_factory=list)
    degree_sum_by_type: list[int] = field(default_factory=list)
    max_degree_by_type: list[int] = field(default_factory=list)
    leader_by_type: list[Optional[int]] = field(default_factory=list)
    leadership_changes_by_type: list[int] = field(default_factory=list)
    total_degree: int = 0

    def __post_init__(self) -> None:
        T = self.num_types
        if not self.counts_by_type:
            self.counts_by_type = [0] * T
            self.degree_sum_by_type = [0] * T
            self.max_degree_by_type = [0] * T
            self.leader_by_type = [None] * T
            self.leadership_changes_by_type = [0] * T

    @property
    def n(self) -> int:
        return len(self.degrees)

    @property
    def D_by_type(self) -> list[float]:
        """Per-type weight totals, exact from integer bookkeeping."""
        b = self.beta
        return [ds + b * c for ds, c in zip(self.degree_sum_by_type, self.counts_by_type)]

    @property
    def total_weight(self) -> float:
        return self.total_degree + self.beta * self.n

    def add_vertex(self, type_id: int, degree: int) -> int:
        """Append a vertex with the given birth degree; returns its id."""
        vid = len(self.degrees)
        self.degrees.append(degree)
        self.types.append(type_id)
        self.counts_by_type[type_id] += 1
        self.degree_sum_by_type[type_id] += degree
        self.total_degree += degree
        if degree > self.max_degree_by_type[type_id]:
            self.max_degree_by_type[type_id] = degree
            if self.leader_by_type[type_id] is not None:
                self.leadership_changes_by_type[type_id] += 1
            self.leader_by_type[type_id] = vid
        elif self.leader_by_type[type_id] is None:
            # first vertex of its type, even at degree zero
            self.leader_by_type[type_id] = vid
        return vid

    def add_degree(self, vertex_id: int, amount: int = 1) -> None:
        """Increase one vertex's degree, maintaining all aggregates."""
        t = self.types[vertex_id]
        deg = self.degrees[vertex_id] + amount
        self.degrees[vertex_id] = deg
        self.degree_sum_by_type[t] += amount
        self.total_degree += amount
        if deg > self.max_degree_by_type[t]:
            self.max_degree_by_type[t] = deg
            if self.leader_by_type[t] != vertex_id:
                if self.leader_by_type[t] is not None:
                    self.leadership_changes_by_type[t] += 1
                self.leader_by_type[t] = vertex_id

    def copy(self) -> "GraphState":
        return GraphState(
            beta=self.beta,
            num_types=self.num_types,
            degrees=list(self.degrees),
            types=list(self.types),
            counts_by_type=list(self.counts_by_type),
            degree_sum_by_type=list(self.degree_sum_by_type),
            max_degree_by_type=list(self.max_degree_by_type),
            leader_by_type=list(self.leader_by_type),
            leadership_changes_by_type=list(self.leadership_changes_by_type),
            total_degree=self.total_degree,
        )

    @classmethod
    def from_vertices(
        cls,
        degrees: Sequence[int],
        types: Sequence[int],
        beta: float,
        num_types: Optional[int] = None,
    ) -> "GraphState":
        """Rebuild a state (and all aggregates) from explicit vertex data.

        Used both as the from-scratch reference when testing incremental
        bookkeeping and to set up arbitrary small states for the one-step
        oracle.  The leader of each type is the lowest vertex id attaining
        the maximum degree; leadership change counters start at zero
        (history is path-dependent and not reconstructible).
        """
        if len(degrees) != len(types):
            raise ValueError("degrees and types must have equal length")
        T = num_types if num_types is not None else (max(types) + 1 if types else 1)
        state = cls(beta=float(beta), num_types=T)
        for deg, t in zip(degrees, types):
            if not 0 <= t < T:
                raise ValueError(f"type id {t} out of range for {T} types")
            if deg < 0:
                raise ValueError("degrees must be nonnegative")
            state.add_vertex(t, deg)
        # canonical leaders: lowest id attaining each max, no change counts
        state.leadership_changes_by_type = [0] * T
        for t in range(T):
            best, leader = 0, None
            for vid, (deg, tt) in enumerate(zip(state.degrees, state.types)):
                if tt == t and (leader is None or deg > best):
                    best, leader = deg, vid
            state.max_degree_by_type[t] = best if leader is not None else 0
            state.leader_by_type[t] = leader
        return state


@dataclass(frozen=True)
class StepOutcome:
    """Record of one executed step.

    ``edge_fallback_count`` counts edge-step pairs whose sample pool had to
    widen to all vertices because the source was the only vertex of its type.
    """

    new_vertex: int
    new_vertex_type: int
    vertex_step_targets: tuple[int, ...]
    edge_step_pairs: tuple[tuple[int, int], ...]
    edge_fallback_count: int = 0


def initial_state(params: ModelParams, rng) -> GraphState:
    """Single-vertex starting graph; the seed's type is drawn from the
    run's generator (one uniform consumed only when there are >= 2 types)."""
    tau = 0 if params.num_types == 1 else draw_type(params.type_probs, rng.random())
    state = GraphState(beta=params.beta, num_types=params.num_types)
    state.add_vertex(tau, 2 * params.initial_self_loops)
    return state
