"""Dynamic weighted vertex sampling in O(log n).

One Fenwick (binary indexed) tree per vertex type, over dense per-type
slots in insertion order, each padded to a power-of-two capacity so the
descent loop needs no bounds check.  Supports weight-proportional draws
globally and within a type, draws with one vertex excluded, and uniform
draws.

Exclusion draws never use rejection (the excluded vertex can carry almost
all of its type's weight, making rejection unbounded).  Instead the
excluded weight is removed from the distribution virtually: a variate is
drawn on ``[0, total - w_excluded)`` and shifted past the excluded
vertex's cumulative interval before the tree descent, which is exactly
equivalent to subtracting the weight, sampling and restoring it, without
mutating the tree.

Stored weights only ever receive integer-valued increments, so individual
weights stay exact; interior tree nodes can accumulate rounding from the
initial build when weights are non-integer, so trees and totals are
rebuilt from the stored weights every ``rebuild_interval`` mutations
(default 2**20).
"""

from __future__ import annotations

import math
from array import array
from typing import Optional, Sequence

from .errors import DuplicateVertex, EmptyIndex, NoCandidate, NonpositiveWeight, UnknownVertex

DEFAULT_REBUILD_INTERVAL = 1 << 20


def _next_pow2(n: int) -> int:
    c = 1
    while c < n:
        c <<= 1
    return c


def _tree_build(values: Sequence[float], cap: int) -> array:
    """O(cap) Fenwick construction over `values` padded with zeros."""
    tree = array("d", bytes(8 * (cap + 1)))
    for i, v in enumerate(values):
        tree[i + 1] = v
    for i in range(1, cap + 1):
        j = i + (i & -i)
        if j <= cap:
            tree[j] += tree[i]
    return tree


def _tree_add(tree: array, cap: int, slot: int, delta: float) -> None:
    j = slot + 1
    while j <= cap:
        tree[j] += delta
        j += j & -j


def _tree_prefix(tree: array, slot_count: int) -> float:
    """Sum of the first `slot_count` slots."""
    s = 0.0
    j = slot_count
    while j > 0:
        s += tree[j]
        j &= j - 1
    return s


def _tree_descend(tree: array, halfcap: int, r: float) -> int:
    """Smallest 0-based slot whose cumulative sum exceeds ``r``.

    ``halfcap`` is capacity >> 1.  When ``r`` is at or beyond the stored
    total (rounding spill) the result can point one past the last real
    slot; callers clamp.
    """
    i = 0
    mask = halfcap
    while mask:
        j = i + mask
        t = tree[j]
        if r >= t:
            r -= t
            i = j
        mask >>= 1
    return i


class WeightIndex:
    """Weighted index over dense vertex ids 0, 1, 2, ... in creation order."""

    __slots__ = (
        "num_types", "_weights", "_vtype", "_vslot", "_members",
        "_trees", "_caps", "_sizes", "_type_totals", "_total",
        "_ops", "_rebuild_interval",
    )

    def __init__(self, num_types: int = 1, rebuild_interval: int = DEFAULT_REBUILD_INTERVAL):
        if num_types < 1:
            raise ValueError("need at least one type")
        self.num_types = num_types
        self._weights: list[float] = []
        self._vtype: list[int] = []
        self._vslot: list[int] = []
        self._members: list[list[int]] = [[] for _ in range(num_types)]
        self._trees: list[array] = [array("d", bytes(16)) for _ in range(num_types)]
        self._caps: list[int] = [1] * num_types
        self._sizes: list[int] = [0] * num_types
        self._type_totals: list[float] = [0.0] * num_types
        self._total: float = 0.0
        self._ops = 0
        self._rebuild_interval = rebuild_interval

    # ---- construction helpers ----------------------------------------

    @classmethod
    def from_weights(
        cls,
        weights: Sequence[float],
        types: Sequence[int],
        num_types: int,
        rebuild_interval: int = DEFAULT_REBUILD_INTERVAL,
    ) -> "WeightIndex":
        """Bulk construction (O(n)); same validation as repeated inserts."""
        if len(weights) != len(types):
            raise ValueError("weights and types must have equal length")
        idx = cls(num_types, rebuild_interval)
        ws, vt, vs = idx._weights, idx._vtype, idx._vslot
        for w, t in zip(weights, types):
            w = float(w)
            if w <= 0.0:
                raise NonpositiveWeight(f"weight must be > 0, got {w}")
            if not 0 <= t < num_types:
                raise ValueError(f"type id {t} out of range")
            members = idx._members[t]
            ws.append(w)
            vt.append(t)
            vs.append(len(members))
            members.append(len(ws) - 1)
        for t in range(num_types):
            vals = [ws[v] for v in idx._members[t]]
            cap = _next_pow2(max(1, len(vals)))
            idx._trees[t] = _tree_build(vals, cap)
            idx._caps[t] = cap
            idx._sizes[t] = len(vals)
            idx._type_totals[t] = math.fsum(vals)
        idx._total = math.fsum(idx._type_totals)
        return idx

    @classmethod
    def from_state(cls, state, rebuild_interval: int = DEFAULT_REBUILD_INTERVAL) -> "WeightIndex":
        """Index a :class:`~pachoice.model.GraphState` with weights deg + beta."""
        b = state.beta
        return cls.from_weights(
            [deg + b for deg in state.degrees], state.types, state.num_types, rebuild_interval
        )

    # ---- introspection -------------------------------------------------

    def __len__(self) -> int:
        return len(self._weights)

    @property
    def total_weight(self) -> float:
        return self._total

    def type_weight(self, type_id: int) -> float:
        return self._type_totals[type_id]

    def type_count(self, type_id: int) -> int:
        return self._sizes[type_id]

    def weight_of(self, vertex_id: int) -> float:
        self._check_vertex(vertex_id)
        return self._weights[vertex_id]

    def type_of(self, vertex_id: int) -> int:
        self._check_vertex(vertex_id)
        return self._vtype[vertex_id]

    def _check_vertex(self, vertex_id: int) -> None:
        if not 0 <= vertex_id < len(self._weights):
            raise UnknownVertex(f"vertex {vertex_id} not in index")

    # ---- mutation -------------------------------------------------------

    def insert_vertex(self, vertex_id: int, type_id: int, weight: float) -> None:
        """Add a vertex.  Ids must be dense and in creation order."""
        count = len(self._weights)
        if vertex_id < count:
            raise DuplicateVertex(f"vertex {vertex_id} already present")
        if vertex_id != count:
            raise ValueError(f"vertex ids must be dense: expected {count}, got {vertex_id}")
        if not 0 <= type_id < self.num_types:
            raise ValueError(f"type id {type_id} out of range")
        weight = float(weight)
        if weight <= 0.0:
            raise NonpositiveWeight(f"weight must be > 0, got {weight}")

        slot = self._sizes[type_id]
        if slot == self._caps[type_id]:
            cap = self._caps[type_id] * 2
            vals = [self._weights[v] for v in self._members[type_id]]
            self._trees[type_id] = _tree_build(vals, cap)
            self._caps[type_id] = cap
        self._weights.append(weight)
        self._vtype.append(type_id)
        self._vslot.append(slot)
        self._members[type_id].append(vertex_id)
        self._sizes[type_id] = slot + 1
        _tree_add(self._trees[type_id], self._caps[type_id], slot, weight)
        self._type_totals[type_id] += weight
        self._total += weight
        self._bump_ops()

    def add_weight(self, vertex_id: int, delta: float) -> None:
        """Add ``delta`` to one vertex's weight (result must stay > 0)."""
        self._check_vertex(vertex_id)
        delta = float(delta)
        w = self._weights[vertex_id] + delta
        if w <= 0.0:
            raise NonpositiveWeight(f"weight of vertex {vertex_id} would become {w}")
        self._weights[vertex_id] = w
        t = self._vtype[vertex_id]
        _tree_add(self._trees[t], self._caps[t], self._vslot[vertex_id], delta)
        self._type_totals[t] += delta
        self._total += delta
        self._bump_ops()

    def _bump_ops(self) -> None:
        self._ops += 1
        if self._ops >= self._rebuild_interval:
            self.rebuild()

    def rebuild(self) -> None:
        """Recompute trees and totals exactly from the stored weights."""
        ws = self._weights
        for t in range(self.num_types):
            vals = [ws[v] for v in self._members[t]]
            self._trees[t] = _tree_build(vals, self._caps[t])
            self._type_totals[t] = math.fsum(vals)
        self._total = math.fsum(self._type_totals)
        self._ops = 0

    # ---- sampling -------------------------------------------------------

    def sample_uniform(self, rng) -> int:
        """Uniform over all vertices."""
        count = len(self._weights)
        if count == 0:
            raise EmptyIndex("no vertices to sample")
        return rng.randrange(count)

    def sample_global(self, rng) -> int:
        """One vertex, chosen with probability weight / total weight."""
        if not self._weights:
            raise EmptyIndex("no vertices to sample")
        if not self._total > 0.0:
            raise EmptyIndex("total weight is not positive")
        r = rng.random() * self._total
        t = -1
        for ti in range(self.num_types):
            tt = self._type_totals[ti]
            if r < tt:
                t = ti
                break
            r -= tt
        if t < 0 or self._sizes[t] == 0:
            # rounding spill past the last type with members
            for ti in range(self.num_types - 1, -1, -1):
                if self._sizes[ti]:
                    t = ti
                    r = self._type_totals[ti]
                    break
        slot = _tree_descend(self._trees[t], self._caps[t] >> 1, r)
        size = self._sizes[t]
        if slot >= size:
            slot = size - 1
        return self._members[t][slot]

    def sample_global_many(self, count: int, rng) -> list[int]:
        return [self.sample_global(rng) for _ in range(count)]

    def sample_type(self, type_id: int, rng) -> int:
        """One vertex of the given type, weight-proportional within the type."""
        return self.sample_type_many(type_id, 1, rng)[0]

    def sample_type_many(self, type_id: int, count: int, rng) -> list[int]:
        size = self._sizes[type_id]
        if size == 0:
            raise NoCandidate(f"type {type_id} has no members")
        tree = self._trees[type_id]
        halfcap = self._caps[type_id] >> 1
        total = self._type_totals[type_id]
        members = self._members[type_id]
        out = []
        rnd = rng.random
        for _ in range(count):
            slot = _tree_descend(tree, halfcap, rnd() * total)
            if slot >= size:
                slot = size - 1
            out.append(members[slot])
        return out

    def sample_type_excluding(self, type_id: int, excluded_vertex: int, rng) -> int:
        """One type member other than ``excluded_vertex``, weight-proportional
        after the excluded vertex's weight is removed from the distribution."""
        return self.sample_type_excluding_many(type_id, excluded_vertex, 1, rng)[0]

    def sample_type_excluding_many(
        self, type_id: int, excluded_vertex: int, count: int, rng
    ) -> list[int]:
        """``count`` i.i.d. draws from the type with one vertex excluded."""
        self._check_vertex(excluded_vertex)
        size = self._sizes[type_id]
        if self._vtype[excluded_vertex] != type_id:
            return self.sample_type_many(type_id, count, rng)
        if size <= 1:
            raise NoCandidate(
                f"type {type_id} has no member besides vertex {excluded_vertex}"
            )
        exc_slot = self._vslot[excluded_vertex]
        w = self._weights[excluded_vertex]
        tree = self._trees[type_id]
        halfcap = self._caps[type_id] >> 1
        cum_before = _tree_prefix(tree, exc_slot)
        total = self._type_totals[type_id] - w
        if not total > 0.0:
            raise NoCandidate(f"no weight left in type {type_id} after exclusion")
        members = self._members[type_id]
        out = []
        rnd = rng.random
        for _ in range(count):
            r = rnd() * total
            if r >= cum_before:
                r += w
            slot = _tree_descend(tree, halfcap, r)
            if slot >= size:
                slot = size - 1
            if slot == exc_slot:
                # reachable only through float rounding at interval edges
                slot = exc_slot + 1 if exc_slot + 1 < size else exc_slot - 1
            out.append(members[slot])
        return out

    def sample_global_excluding_many(self, excluded_vertex: int, count: int, rng) -> list[int]:
        """``count`` i.i.d. draws over all vertices except one (any type)."""
        self._check_vertex(excluded_vertex)
        if len(self._weights) <= 1:
            raise NoCandidate(f"no vertex besides {excluded_vertex}")
        te = self._vtype[excluded_vertex]
        exc_slot = self._vslot[excluded_vertex]
        w = self._weights[excluded_vertex]
        cum_before = _tree_prefix(self._trees[te], exc_slot)
        total = self._total - w
        if not total > 0.0:
            raise NoCandidate("no weight left after exclusion")
        out = []
        rnd = rng.random
        for _ in range(count):
            r = rnd() * total
            t = -1
            for ti in range(self.num_types):
                tt = self._type_totals[ti]
                if ti == te:
                    tt -= w
                if r < tt:
                    t = ti
                    break
                r -= tt
            if t < 0 or self._sizes[t] == 0 or (t == te and self._sizes[t] <= 1):
                for ti in range(self.num_types - 1, -1, -1):
                    if self._sizes[ti] > (1 if ti == te else 0):
                        t = ti
                        r = self._type_totals[ti] - (w if ti == te else 0.0)
                        break
            if t == te and r >= cum_before:
                r += w
            size = self._sizes[t]
            slot = _tree_descend(self._trees[t], self._caps[t] >> 1, r)
            if slot >= size:
                slot = size - 1
            if t == te and slot == exc_slot:
                slot = exc_slot + 1 if exc_slot + 1 < size else exc_slot - 1
            out.append(self._members[t][slot])
        return out

    # ---- exact distributions (test oracles) -----------------------------

    def exact_probabilities(self) -> list[float]:
        """Per-vertex probability under :meth:`sample_global`, enumerated
        from the tree's actual interval boundaries."""
        probs = [0.0] * len(self._weights)
        if not self._weights:
            return probs
        total = self._total
        for t in range(self.num_types):
            tree = self._trees[t]
            members = self._members[t]
            prev = 0.0
            for slot in range(self._sizes[t]):
                cum = _tree_prefix(tree, slot + 1)
                probs[members[slot]] = (cum - prev) / total
                prev = cum
        return probs

    def exact_probabilities_type_excluding(
        self, type_id: int, excluded_vertex: int
    ) -> dict[int, float]:
        """Per-vertex probability under :meth:`sample_type_excluding`."""
        self._check_vertex(excluded_vertex)
        size = self._sizes[type_id]
        tree = self._trees[type_id]
        members = self._members[type_id]
        exclude_here = self._vtype[excluded_vertex] == type_id
        total = self._type_totals[type_id]
        if exclude_here:
            total -= self._weights[excluded_vertex]
        probs: dict[int, float] = {}
        prev = 0.0
        for slot in range(size):
            cum = _tree_prefix(tree, slot + 1)
            v = members[slot]
            if not (exclude_here and v == excluded_vertex):
                probs[v] = (cum - prev) / total
            prev = cum
        return probs

    def recomputed_type_totals(self) -> list[float]:
        """Exact per-type totals from the stored weights (test helper)."""
        return [
            math.fsum(self._weights[v] for v in self._members[t])
            for t in range(self.num_types)
        ]

    # ---- reference implementation of exclusion (kept for tests) ---------

    def _sample_type_excluding_subtract(self, type_id: int, excluded_vertex: int, rng) -> int:
        """Literal subtract/sample/restore exclusion; distributionally equal
        to the virtual-shift implementation, used to cross-check it."""
        self._check_vertex(excluded_vertex)
        if self._vtype[excluded_vertex] != type_id:
            return self.sample_type_many(type_id, 1, rng)[0]
        size = self._sizes[type_id]
        if size <= 1:
            raise NoCandidate(
                f"type {type_id} has no member besides vertex {excluded_vertex}"
            )
        exc_slot = self._vslot[excluded_vertex]
        w = self._weights[excluded_vertex]
        tree = self._trees[type_id]
        cap = self._caps[type_id]
        _tree_add(tree, cap, exc_slot, -w)
        try:
            total = self._type_totals[type_id] - w
            slot = _tree_descend(tree, cap >> 1, rng.random() * total)
            if slot >= size:
                slot = size - 1
            if slot == exc_slot:
                slot = exc_slot + 1 if exc_slot + 1 < size else exc_slot - 1
        finally:
            _tree_add(tree, cap, exc_slot, w)
        return self._members[type_id][slot]
