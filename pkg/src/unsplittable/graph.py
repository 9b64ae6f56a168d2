"""Exact-arithmetic multigraph, flows and flow decomposition.

Every numeric quantity is a :class:`fractions.Fraction`.  Arcs are addressed by
their id, never by endpoint pair, so parallel arcs are first-class.
"""

from __future__ import annotations

import heapq
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Hashable, Iterable, Mapping

Vertex = Hashable
ArcId = Hashable
Flow = Mapping[ArcId, Fraction]

ZERO = Fraction(0)


class GraphError(ValueError):
    pass


class NotATransshipment(GraphError):
    pass


class CyclicSupport(GraphError):
    pass


def as_fraction(value) -> Fraction:
    """Convert ints, decimal strings and ``p/q`` literals without rounding."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not accepted; pass a string or Fraction")
    return Fraction(value)


@dataclass(frozen=True)
class Arc:
    id: ArcId
    tail: Vertex
    head: Vertex
    capacity: Fraction = ZERO


@dataclass(frozen=True)
class Instance:
    vertices: tuple
    arcs: tuple
    balance: Mapping = field(default_factory=dict)

    @classmethod
    def build(cls, vertices: Iterable, arcs: Iterable, balance: Mapping | None = None) -> "Instance":
        """Convenience constructor: ``arcs`` are ``(id, tail, head, capacity)`` tuples or :class:`Arc`."""
        arc_objs = []
        for a in arcs:
            if not isinstance(a, Arc):
                a = Arc(a[0], a[1], a[2], as_fraction(a[3]) if len(a) > 3 else ZERO)
            else:
                a = Arc(a.id, a.tail, a.head, as_fraction(a.capacity))
            arc_objs.append(a)
        bal = {v: ZERO for v in vertices}
        for v, b in (balance or {}).items():
            bal[v] = as_fraction(b)
        return cls(tuple(vertices), tuple(arc_objs), bal)

    @cached_property
    def arc(self) -> dict:
        return {a.id: a for a in self.arcs}

    @cached_property
    def index(self) -> dict:
        """Vertex -> position; used for deterministic lowest-id tie breaks."""
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def arc_index(self) -> dict:
        return {a.id: i for i, a in enumerate(self.arcs)}

    @cached_property
    def out_arcs(self) -> dict:
        out = {v: [] for v in self.vertices}
        for a in self.arcs:
            out[a.tail].append(a.id)
        return out

    @cached_property
    def in_arcs(self) -> dict:
        inc = {v: [] for v in self.vertices}
        for a in self.arcs:
            inc[a.head].append(a.id)
        return inc

    def b(self, v) -> Fraction:
        return self.balance.get(v, ZERO)

    @property
    def sources(self) -> list:
        return [v for v in self.vertices if self.b(v) > 0]

    @property
    def sinks(self) -> list:
        return [v for v in self.vertices if self.b(v) < 0]

    def demand(self, t) -> Fraction:
        return -self.b(t)

    @property
    def d_max(self) -> Fraction:
        return max((-self.b(t) for t in self.sinks), default=ZERO)

    @property
    def max_supply(self) -> Fraction:
        return max((self.b(s) for s in self.sources), default=ZERO)

    @property
    def c_min(self) -> Fraction | None:
        return min((a.capacity for a in self.arcs), default=None)

    @property
    def total_demand(self) -> Fraction:
        return sum((-self.b(t) for t in self.sinks), ZERO)

    def reversed(self) -> "Instance":
        """All arcs flipped, balances negated: sources and sinks swap roles."""
        arcs = tuple(Arc(a.id, a.head, a.tail, a.capacity) for a in self.arcs)
        return Instance(self.vertices, arcs, {v: -b for v, b in self.balance.items()})


@dataclass(frozen=True)
class PathFlow:
    source: Vertex
    sink: Vertex
    value: Fraction
    arcs: tuple

    def vertices(self, inst: Instance) -> list:
        if not self.arcs:
            return [self.source]
        seq = [inst.arc[self.arcs[0]].tail]
        for a in self.arcs:
            seq.append(inst.arc[a].head)
        return seq


@dataclass(frozen=True)
class CycleFlow:
    value: Fraction
    arcs: tuple


@dataclass
class UnsplittableSolution:
    paths: list = field(default_factory=list)

    def flow(self) -> dict:
        return superpose(self.paths)

    def pairs(self) -> list:
        return [(p.source, p.sink) for p in self.paths]

    def __len__(self) -> int:
        return len(self.paths)


def superpose(paths: Iterable) -> dict:
    total: dict = defaultdict(Fraction)
    for p in paths:
        for a in p.arcs:
            total[a] += p.value
    return dict(total)


def validate_instance(inst: Instance) -> list[str]:
    """Return a list of human-readable violations; empty means valid."""
    problems = []
    seen_v = set()
    for v in inst.vertices:
        if v in seen_v:
            problems.append(f"duplicate vertex {v}")
        seen_v.add(v)
    seen_a = set()
    for a in inst.arcs:
        if a.id in seen_a:
            problems.append(f"duplicate arc id {a.id}")
        seen_a.add(a.id)
        if a.tail not in seen_v or a.head not in seen_v:
            problems.append(f"arc {a.id} has unknown endpoint")
        if a.tail == a.head:
            problems.append(f"self-loop at arc {a.id}")
        if a.capacity < 0:
            problems.append(f"negative capacity on arc {a.id}")
    for v in inst.balance:
        if v not in seen_v:
            problems.append(f"balance given for unknown vertex {v}")
    total = sum(inst.balance.values(), ZERO)
    if total != 0:
        problems.append(f"balance sum != 0 (sum = {total})")
    return problems


def excess(inst: Instance, flow: Flow, v) -> Fraction:
    """Outflow minus inflow at ``v``."""
    if v not in inst.index:
        raise GraphError(f"unknown vertex {v}")
    out = sum((flow.get(a, ZERO) for a in inst.out_arcs[v]), ZERO)
    inc = sum((flow.get(a, ZERO) for a in inst.in_arcs[v]), ZERO)
    return out - inc


def excesses(inst: Instance, flow: Flow) -> dict:
    ex = {v: ZERO for v in inst.vertices}
    for a in inst.arcs:
        f = flow.get(a.id, ZERO)
        if f:
            ex[a.tail] += f
            ex[a.head] -= f
    return ex


def transshipment_violations(inst: Instance, flow: Flow, check_capacity: bool = False) -> list[str]:
    problems = []
    for a_id, f in flow.items():
        if a_id not in inst.arc:
            problems.append(f"flow on unknown arc {a_id}")
        elif f < 0:
            problems.append(f"negative flow on arc {a_id}")
        elif check_capacity and f > inst.arc[a_id].capacity:
            problems.append(f"capacity exceeded on arc {a_id}")
    if problems:
        return problems
    for v, ex in excesses(inst, flow).items():
        if ex != inst.b(v):
            problems.append(f"excess {ex} != balance {inst.b(v)} at {v}")
    return problems


def is_transshipment(inst: Instance, flow: Flow, check_capacity: bool = False) -> bool:
    return not transshipment_violations(inst, flow, check_capacity)


def support(flow: Flow) -> list:
    return [a for a, f in flow.items() if f > 0]


def topological_order(vertices: Iterable, arcs: Iterable) -> list:
    """Kahn's algorithm over ``(tail, head)`` pairs; ties keep input vertex order.

    Raises :class:`CyclicSupport` when the digraph has a directed cycle.
    """
    verts = list(vertices)
    pos = {v: i for i, v in enumerate(verts)}
    indeg = {v: 0 for v in verts}
    succ = defaultdict(list)
    for tail, head in arcs:
        succ[tail].append(head)
        indeg[head] += 1
    ready = [pos[v] for v in verts if indeg[v] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = verts[heapq.heappop(ready)]
        order.append(v)
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(ready, pos[w])
    if len(order) != len(verts):
        raise CyclicSupport("digraph contains a directed cycle")
    return order


def support_order(inst: Instance, flow: Flow) -> list:
    arcs = [(inst.arc[a].tail, inst.arc[a].head) for a in inst.arc if flow.get(a, ZERO) > 0]
    return topological_order(inst.vertices, arcs)


def _find_cycle(inst: Instance, residual: dict):
    """Return a list of arc ids forming a directed cycle in the positive support, or None."""
    out = defaultdict(list)
    for a in inst.arcs:
        if residual.get(a.id, ZERO) > 0:
            out[a.tail].append(a.id)
    state = {}
    for root in inst.vertices:
        if state.get(root):
            continue
        # iterative DFS, stack holds (vertex, iterator position)
        stack = [(root, 0)]
        via = {}
        state[root] = 1
        while stack:
            v, i = stack[-1]
            if i < len(out[v]):
                stack[-1] = (v, i + 1)
                a = out[v][i]
                w = inst.arc[a].head
                if state.get(w) == 1:
                    cyc = [a]
                    u = v
                    while u != w:
                        cyc.append(via[u])
                        u = inst.arc[via[u]].tail
                    cyc.reverse()
                    return cyc
                if not state.get(w):
                    state[w] = 1
                    via[w] = a
                    stack.append((w, 0))
            else:
                state[v] = 2
                stack.pop()
    return None


def cancel_cycles(inst: Instance, flow: Flow) -> dict:
    """Remove flow circulating on directed cycles; excess at every vertex is unchanged."""
    residual = {a: f for a, f in flow.items() if f > 0}
    while True:
        cyc = _find_cycle(inst, residual)
        if cyc is None:
            break
        delta = min(residual[a] for a in cyc)
        for a in cyc:
            residual[a] -= delta
            if residual[a] == 0:
                del residual[a]
    return {a.id: residual.get(a.id, ZERO) for a in inst.arcs if a.id in flow}


def decompose(inst: Instance, flow: Flow) -> tuple[list, list]:
    """Split a b-transshipment into source-sink paths and cycles.

    Paths are extracted greedily: walk from the lowest-indexed source with supply
    left along the lowest-indexed positive arc until a vertex with unmet demand is
    hit.  A walk that revisits a vertex yields a cycle instead.
    """
    problems = transshipment_violations(inst, flow)
    if problems:
        raise NotATransshipment("; ".join(problems[:3]))
    residual = {a: f for a, f in flow.items() if f > 0}
    supply = {s: inst.b(s) for s in inst.sources}
    deficit = {t: -inst.b(t) for t in inst.sinks}
    out_order = {v: sorted(inst.out_arcs[v], key=inst.arc_index.get) for v in inst.vertices}
    paths, cycles = [], []

    def take_cycle(arcs):
        delta = min(residual[a] for a in arcs)
        for a in arcs:
            residual[a] -= delta
            if residual[a] == 0:
                del residual[a]
        cycles.append(CycleFlow(delta, tuple(arcs)))

    for s in inst.sources:
        while supply[s] > 0:
            walk, seen = [], {s: 0}
            v = s
            while True:
                if v != s and deficit.get(v, ZERO) > 0:
                    break
                nxt = next(a for a in out_order[v] if residual.get(a, ZERO) > 0)
                walk.append(nxt)
                v = inst.arc[nxt].head
                if v in seen:
                    take_cycle(walk[seen[v]:])
                    del walk[seen[v]:]
                    v = inst.arc[walk[-1]].head if walk else s
                    seen = {s: 0}
                    for i, a in enumerate(walk):
                        seen[inst.arc[a].head] = i + 1
                    continue
                seen[v] = len(walk)
            t = v
            delta = min([supply[s], deficit[t]] + [residual[a] for a in walk])
            for a in walk:
                residual[a] -= delta
                if residual[a] == 0:
                    del residual[a]
            supply[s] -= delta
            deficit[t] -= delta
            paths.append(PathFlow(s, t, delta, tuple(walk)))
    while residual:
        cyc = _find_cycle(inst, residual)
        take_cycle(cyc)
    return paths, cycles
