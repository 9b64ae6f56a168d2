"""Feasible fractional b-transshipments via exact max-flow.

A super-source feeds every source with its supply and every sink drains into a
super-sink; the instance is feasible iff the max-flow saturates all of them.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .graph import ZERO, Instance, cancel_cycles

_SRC, _SNK = ("<source>",), ("<sink>",)


class Infeasible(ValueError):
    def __init__(self, message, cut):
        super().__init__(message)
        self.cut = cut


@dataclass
class CutWitness:
    """Vertex side ``side`` of a cut whose capacity is below the demand it must carry."""

    side: frozenset
    capacity: Fraction
    demand: Fraction


def max_flow(inst: Instance):
    """Edmonds-Karp from the super-source to the super-sink.

    Returns ``(value, flow, reachable)`` where ``reachable`` is the residual
    reachable set of the last search (a min cut when the flow is maximum).
    """
    # edges: [tail, head, residual, reverse-index, arc id or None]
    edges = []
    adj = {v: [] for v in inst.vertices}
    adj[_SRC], adj[_SNK] = [], []

    def add(u, v, cap, aid):
        adj[u].append(len(edges))
        edges.append([u, v, Fraction(cap), len(edges) + 1, aid])
        adj[v].append(len(edges))
        edges.append([v, u, ZERO, len(edges) - 1, None])

    for a in inst.arcs:
        add(a.tail, a.head, a.capacity, a.id)
    for s in inst.sources:
        add(_SRC, s, inst.b(s), None)
    for t in inst.sinks:
        add(t, _SNK, -inst.b(t), None)

    value = ZERO
    while True:
        via = {_SRC: None}
        queue = deque([_SRC])
        while queue and _SNK not in via:
            u = queue.popleft()
            for e in adj[u]:
                _, v, r, _, _ = edges[e]
                if r > 0 and v not in via:
                    via[v] = e
                    queue.append(v)
        if _SNK not in via:
            break
        path, v = [], _SNK
        while via[v] is not None:
            path.append(via[v])
            v = edges[via[v]][0]
        push = min(edges[e][2] for e in path)
        for e in path:
            edges[e][2] -= push
            edges[edges[e][3]][2] += push
        value += push

    flow = {}
    for a in inst.arcs:
        flow[a.id] = ZERO
    for e in edges:
        if e[4] is not None:
            cap = inst.arc[e[4]].capacity
            flow[e[4]] = cap - e[2]
    return value, flow, frozenset(v for v in via if v not in (_SRC, _SNK))


def solve_fractional(inst: Instance) -> dict:
    """Feasible b-transshipment with acyclic support, or :class:`Infeasible` with a cut."""
    value, flow, side = max_flow(inst)
    need = inst.total_demand
    if value < need:
        cap = sum((a.capacity for a in inst.arcs if a.tail in side and a.head not in side), ZERO)
        # cut edges: arcs leaving the side, feeders of outside sources, drains of inside sinks
        cap += sum((inst.b(s) for s in inst.sources if s not in side), ZERO)
        cap += sum((-inst.b(t) for t in inst.sinks if t in side), ZERO)
        cut = CutWitness(side, cap, need)
        raise Infeasible(f"max flow {value} < total demand {need}", cut)
    return cancel_cycles(inst, flow)
