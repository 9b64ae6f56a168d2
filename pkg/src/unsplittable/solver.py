"""Dinitz-Garg-Goemans style rounding of a fractional transshipment.

The multi-source case is handled by hanging every source below a super-source
``S_STAR`` through a dummy arc that carries exactly the source's supply.  Sinks
are then walked backwards towards ``S_STAR``; alternating cycles that avoid
``S_STAR`` are augmented as in the single-source algorithm, and when every
backward route from a junction ends at ``S_STAR`` the flow on the explored
in-tree (the *singular digraph*) is peeled off leaf by leaf, splitting sinks
into sub-sinks where needed.  Supplies therefore stay fixed throughout.

``solve_dgg_ssuf`` runs the classical single-source algorithm with the real
source as root and no dummy arcs.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

from .graph import (
    ZERO,
    CyclicSupport,
    Instance,
    NotATransshipment,
    PathFlow,
    UnsplittableSolution,
    cancel_cycles,
    support_order,
    topological_order,
    transshipment_violations,
)

log = logging.getLogger(__name__)


class AlgorithmInvariantError(RuntimeError):
    """Raised when an internal invariant breaks; never caused by valid input."""


class _SuperSource:
    __slots__ = ()

    def __repr__(self):
        return "s*"

    def __str__(self):
        return "s*"

    def __reduce__(self):
        return (_SuperSource, ())

    def __eq__(self, other):
        return isinstance(other, _SuperSource)

    def __hash__(self):
        return hash("<super-source>")


S_STAR = _SuperSource()


@dataclass(frozen=True)
class DummyArc:
    """The arc ``(s*, source)``."""

    source: object

    def __str__(self):
        return f"dummy({self.source})"


@dataclass
class SsufDerivation:
    instance: Instance
    flow: dict
    dummy: dict
    demand: dict
    d_max: Fraction


def derive_ssuf(inst: Instance, x) -> SsufDerivation:
    """Attach ``s*`` and one dummy arc per source carrying that source's supply."""
    problems = transshipment_violations(inst, x)
    if problems:
        raise NotATransshipment("; ".join(problems[:3]))
    support_order(inst, x)  # raises CyclicSupport
    flow = {a.id: x[a.id] for a in inst.arcs if x.get(a.id, ZERO) > 0}
    dummy = {}
    for s in inst.sources:
        dummy[s] = DummyArc(s)
        flow[dummy[s]] = inst.b(s)
    demand = {t: -inst.b(t) for t in inst.sinks}
    return SsufDerivation(inst, flow, dummy, demand, max(demand.values(), default=ZERO))


@dataclass
class SubSink:
    sink: object
    counter: int
    location: object
    demand: Fraction
    trace: list = field(default_factory=list)
    source: object = None

    @property
    def id(self):
        return (self.sink, self.counter)


@dataclass(frozen=True)
class NiceCycle:
    steps: tuple  # (arc, +1 forward | -1 backward)


@dataclass(frozen=True)
class SingularDigraph:
    root: object
    entering: object
    arcs: tuple


@dataclass
class Event:
    kind: str
    iteration: int
    data: dict


@dataclass
class SolveResult:
    solution: UnsplittableSolution
    iterations: int
    events: list
    d_max: Fraction
    variant: str
    bound: Fraction
    instance: Instance = None
    x: dict = None

    @property
    def stats(self) -> dict:
        flow = self.solution.flow()
        x = self.x or {}
        arcs = self.instance.arcs if self.instance is not None else ()
        diffs = [flow.get(a.id, ZERO) - x.get(a.id, ZERO) for a in arcs]
        return {
            "variant": self.variant,
            "paths": len(self.solution.paths),
            "iterations": self.iterations,
            "d_max": self.d_max,
            "bound": self.bound,
            "max_increase": max(diffs, default=ZERO),
            "max_decrease": -min(diffs, default=ZERO),
        }


class SolverState:
    """Mutable network for one run.  ``direction`` is ``"upper"`` or ``"lower"``."""

    def __init__(self, inst: Instance, x, *, mode="modified", direction="upper", debug=False):
        if mode not in ("modified", "original"):
            raise ValueError(mode)
        if direction not in ("upper", "lower"):
            raise ValueError(direction)
        self.inst = inst
        self.mode = mode
        self.direction = direction
        self.debug = debug
        self.tail, self.head, self.akey = {}, {}, {}
        self.y = {}
        for a in inst.arcs:
            self.tail[a.id], self.head[a.id] = a.tail, a.head
            self.akey[a.id] = inst.arc_index[a.id]
        if mode == "modified":
            der = derive_ssuf(inst, x)
            self.root = S_STAR
            self.y = dict(der.flow)
            for s, d in der.dummy.items():
                self.tail[d], self.head[d] = S_STAR, s
                self.akey[d] = len(inst.arcs) + inst.index[s]
        else:
            problems = transshipment_violations(inst, x)
            if problems:
                raise NotATransshipment("; ".join(problems[:3]))
            support_order(inst, x)
            if len(inst.sources) != 1:
                raise ValueError("the single-source algorithm needs exactly one source")
            self.root = inst.sources[0]
            self.y = {a.id: x[a.id] for a in inst.arcs if x.get(a.id, ZERO) > 0}
        self.vkey = dict(inst.index)
        self.vkey[S_STAR] = -1
        self.out = defaultdict(set)
        self.inc = defaultdict(set)
        for a in self.y:
            self.out[self.tail[a]].add(a)
            self.inc[self.head[a]].add(a)
        self.sinks_at = defaultdict(list)
        self.counters = {}
        for t in inst.sinks:
            self.counters[t] = 0
            self.sinks_at[t].append(SubSink(t, 0, t, -inst.b(t)))
        self.delivered = []
        self.singular = frozenset()
        self.funnel = frozenset()
        self.iteration = 0
        self.events = []
        self._moved_singular = set()
        self._prev_singular = frozenset()
        # bipartite source-sink graph, kept as a union-find over ("s", v) / ("t", v)
        self._uf = {}

    # ------------------------------------------------------------------ basics
    def live(self, a) -> bool:
        return a in self.y

    def dummy_of(self, s):
        return DummyArc(s)

    def log(self, kind, **data):
        self.events.append(Event(kind, self.iteration, data))

    def _delete(self, a):
        del self.y[a]
        self.out[self.tail[a]].discard(a)
        self.inc[self.head[a]].discard(a)
        self.log("delete", arc=a)

    def _change(self, a, delta):
        before = self.y[a]
        after = before + delta
        if after < 0:
            raise AlgorithmInvariantError(f"negative flow on {a}")
        self.y[a] = after
        if after == 0:
            self._delete(a)
        return before, after

    def _sort_subs(self, subs):
        return sorted(subs, key=lambda s: (-s.demand, self.vkey[s.sink], s.counter))

    def _new_sub(self, parent: SubSink, demand) -> SubSink:
        self.counters[parent.sink] += 1
        sub = SubSink(parent.sink, self.counters[parent.sink], parent.location, demand, list(parent.trace))
        self.sinks_at[parent.location].append(sub)
        return sub

    def _split(self, sub: SubSink, demand) -> SubSink:
        """Carve a new sub-sink of the given demand out of ``sub``."""
        if not 0 < demand < sub.demand:
            raise AlgorithmInvariantError("split amount out of range")
        sub.demand -= demand
        new = self._new_sub(sub, demand)
        self.log("split", sub=sub.id, new=new.id, at=sub.location, demand=demand, rest=sub.demand)
        return new

    def move(self, sub: SubSink, a):
        """Move ``sub`` backward along live arc ``a`` consuming its demand."""
        if self.head[a] != sub.location:
            raise AlgorithmInvariantError("move along arc not entering the sub-sink")
        if a in self.singular:
            self._moved_singular.add(a)
        before, after = self._change(a, -sub.demand)
        self.sinks_at[sub.location].remove(sub)
        sub.location = self.tail[a]
        sub.trace.append(a)
        self.log("move", sub=sub.id, arc=a, demand=sub.demand, before=before, after=after)
        if sub.location == self.root:
            self._deliver(sub)
        else:
            self.sinks_at[sub.location].append(sub)

    def _deliver(self, sub: SubSink):
        if self.mode == "modified":
            sub.source = self.head[sub.trace[-1]]
        else:
            sub.source = self.root
        self.delivered.append(sub)
        self.log("deliver", sub=sub.id, source=sub.source, demand=sub.demand)
        a, b = self._find(("s", sub.source)), self._find(("t", sub.sink))
        if a == b:
            raise AlgorithmInvariantError(
                f"source-sink graph cycle closing at ({sub.source}, {sub.sink})"
            )
        self._uf[a] = b

    def _find(self, k):
        root = k
        while self._uf.get(root, root) != root:
            root = self._uf[root]
        while self._uf.get(k, k) != root:
            self._uf[k], k = root, self._uf[k]
        return root

    def pending(self):
        return [s for v, subs in self.sinks_at.items() for s in subs]

    def done(self) -> bool:
        return not any(self.sinks_at.values())

    # --------------------------------------------------------------- phases
    def preliminary_phase(self):
        """Move sinks along any arc carrying at least their demand, sweeping arcs by id."""
        changed = True
        while changed:
            changed = False
            for a in sorted(self.y, key=self.akey.get):
                for sub in self._sort_subs(self.sinks_at.get(self.head.get(a), ())):
                    if self.live(a) and sub.location == self.head[a] and self.y[a] >= sub.demand:
                        self.move(sub, a)
                        changed = True

    def label(self):
        """Label singular arcs and funnel vertices of the live digraph."""
        verts = set(self.out) | set(self.inc)
        verts = sorted((v for v in verts if self.out[v] or self.inc[v]), key=self.vkey.get)
        order = topological_order(verts, [(self.tail[a], self.head[a]) for a in self.y])
        good = {}
        for v in reversed(order):
            good[v] = len(self.out[v]) <= 1 and all(good[self.head[a]] for a in self.out[v])
        self.singular = frozenset(a for a in self.y if good[self.head[a]])
        self.funnel = frozenset(v for v in verts if len(self.out[v]) <= 1)
        if self.debug:
            for a in self._prev_singular:
                if self.live(a) and a not in self.singular:
                    raise AlgorithmInvariantError(f"arc {a} lost its singular label")
            self._prev_singular = self.singular
            self.log(
                "label",
                live={a: (self.tail[a], self.head[a], self.y[a]) for a in self.y},
                singular=self.singular,
                pending=[(s.id, s.location, s.demand) for s in self.pending()],
                root=self.root,
            )

    def _forward_start(self):
        cands = [v for v in self.out if self.out[v] and (v != S_STAR)]
        if not cands:
            raise AlgorithmInvariantError("no vertex with outgoing arcs")
        nonfunnel = [v for v in cands if len(self.out[v]) >= 2]
        return min(nonfunnel or cands, key=self.vkey.get)

    def _accepts(self, u) -> bool:
        """Whether a backward search may stop at ``u`` and turn forward."""
        if u == S_STAR:
            return False
        return len(self.out[u]) >= 2

    def _backward_search(self, w, a_prime):
        """DFS over incoming arcs from ``w`` (skipping ``a_prime``), ascending arc id.

        Returns ``(path, explored)`` where ``path`` lists the arcs from ``w`` up to
        the first non-funnel vertex found, or ``None`` if there is none.
        """
        explored = []
        seen = {w}
        stack = [(w, iter(sorted(self.inc[w], key=self.akey.get)))]
        via = []
        while stack:
            v, it = stack[-1]
            a = next(it, None)
            if a is None:
                stack.pop()
                if via:
                    via.pop()
                continue
            if v == w and a == a_prime:
                continue
            u = self.tail[a]
            explored.append(a)
            if u in seen:
                continue
            seen.add(u)
            if self._accepts(u):
                return via + [a], explored
            if u == S_STAR:
                continue
            via.append(a)
            stack.append((u, iter(sorted(self.inc[u], key=self.akey.get))))
        return None, explored

    def find_structure(self):
        start = self._forward_start()
        pos = {start: 0}
        n_vertices = 1
        steps = []
        cur, exclude = start, None
        while True:
            while self.out[cur]:
                a = min((a for a in self.out[cur] if a != exclude), key=self.akey.get)
                exclude = None
                steps.append((a, 1))
                cur = self.head[a]
                if cur in pos:
                    return NiceCycle(tuple(steps[pos[cur]:]))
                pos[cur] = n_vertices
                n_vertices += 1
            w, a_prime = cur, steps[-1][0]
            path, explored = self._backward_search(w, a_prime)
            if path is None:
                if self.mode == "original":
                    raise AlgorithmInvariantError("single-source run reached a dead end")
                return SingularDigraph(w, a_prime, tuple(explored))
            for a in path:
                steps.append((a, -1))
                cur = self.tail[a]
                if cur in pos:
                    return NiceCycle(tuple(steps[pos[cur]:]))
                pos[cur] = n_vertices
                n_vertices += 1
            exclude = path[-1]

    def augment_nice_cycle(self, cycle: NiceCycle) -> Fraction:
        fwd = [a for a, d in cycle.steps if d > 0]
        bwd = [a for a, d in cycle.steps if d < 0]
        if self.mode == "modified" and any(
            S_STAR in (self.tail[a], self.head[a]) for a in fwd + bwd
        ):
            raise AlgorithmInvariantError("cycle through the super-source")
        # the arcs that shrink, and the arcs whose growth is capped by sink demands
        shrink, grow = (fwd, bwd) if self.direction == "upper" else (bwd, fwd)
        terms = [min(self.y[a] for a in shrink)]
        gaps = [
            sub.demand - self.y[a]
            for a in grow
            for sub in self.sinks_at.get(self.head[a], ())
            if sub.demand > self.y[a]
        ]
        if gaps:
            terms.append(min(gaps))
        delta = min(terms)
        if delta <= 0:
            raise AlgorithmInvariantError("non-positive augmentation amount")
        before = {a: self.y[a] for a in shrink + grow}
        for a in grow:
            self._change(a, delta)
        for a in shrink:
            self._change(a, -delta)
        self.log("augment", steps=cycle.steps, delta=delta, before=before)
        if self.debug:
            for a in shrink + grow:
                if a not in self.singular and self.y.get(a, ZERO) > before[a] and self.direction == "upper":
                    raise AlgorithmInvariantError(f"non-singular arc {a} increased")
                if a not in self.singular and self.y.get(a, ZERO) < before[a] and self.direction == "lower":
                    raise AlgorithmInvariantError(f"non-singular arc {a} decreased")
        return delta

    def route_singular_digraph(self, sd: SingularDigraph):
        w, a_prime = sd.root, sd.entering
        eligible = [s for s in self.sinks_at[w] if s.demand > self.y[a_prime]]
        if not eligible:
            raise AlgorithmInvariantError(f"no sub-sink at {w} exceeds the entering flow")
        t = self._sort_subs(eligible)[0]
        t2 = self._split(t, t.demand - self.y[a_prime])
        t1 = t
        sd_arcs = set(sd.arcs)
        verts = {w} | {self.tail[a] for a in sd_arcs}
        verts.discard(S_STAR)
        self.log("singular_digraph", root=w, entering=a_prime, arcs=sd.arcs, chosen=t1.id,
                 split=(t1.id, t1.demand, t2.id, t2.demand))
        vorder = sorted(verts, key=self.vkey.get)

        while True:
            waiting = [s for v in vorder for s in self.sinks_at[v] if s is not t1]
            if not waiting:
                break
            leaf = None
            for v in vorder:
                entering = [a for a in self.inc[v] if a != a_prime]
                if entering and all(self.tail[a] == S_STAR for a in entering):
                    leaf = v
                    break
            if leaf is None:
                raise AlgorithmInvariantError("singular digraph has no source leaf")
            path = [self.dummy_of(leaf)]
            v = leaf
            while True:
                here = [s for s in self.sinks_at[v] if s is not t1]
                if v == w and len(here) > 1:
                    here = [s for s in here if s is not t2]
                if here:
                    target = self._sort_subs(here)[0]
                    break
                if len(self.out[v]) != 1:
                    raise AlgorithmInvariantError(f"walk stuck at {v} inside the singular digraph")
                (a,) = tuple(self.out[v])
                if a not in sd_arcs:
                    raise AlgorithmInvariantError("walk left the singular digraph")
                path.append(a)
                v = self.head[a]
            amount = min(self.y[a] for a in path)
            mover = target if target.demand <= amount else self._split(target, amount)
            for a in reversed(path):
                self.move(mover, a)
        leftovers = [a for a in sd_arcs if self.live(a)]
        if leftovers:
            raise AlgorithmInvariantError(f"singular digraph arcs keep flow: {leftovers}")
        if self.y[a_prime] != t1.demand:
            raise AlgorithmInvariantError("entering arc flow differs from the remaining demand")
        self.move(t1, a_prime)

    def move_sinks(self):
        """Apply the moving rules until none applies: exact singular arcs first."""
        moved = True
        while moved:
            moved = False
            for v in sorted((v for v, s in self.sinks_at.items() if s), key=self.vkey.get):
                for sub in self._sort_subs(self.sinks_at[v]):
                    arc = self._pick_move(sub)
                    if arc is not None:
                        self.move(sub, arc)
                        moved = True
                        break
                if moved:
                    break

    def _pick_move(self, sub):
        arcs = sorted(self.inc[sub.location], key=self.akey.get)
        for a in arcs:
            if a in self.singular and self.y[a] == sub.demand:
                return a
        for a in arcs:
            if a not in self.singular and self.y[a] >= sub.demand:
                return a
        return None

    # ------------------------------------------------------------- checks
    def check_invariants(self):
        """Invariants (i) and (ii) plus the source-sink component invariant."""
        inflow, outflow = defaultdict(Fraction), defaultdict(Fraction)
        for a, f in self.y.items():
            outflow[self.tail[a]] += f
            inflow[self.head[a]] += f
        for v in set(inflow) | set(outflow) | set(self.sinks_at):
            if v == self.root:
                continue
            need = sum((s.demand for s in self.sinks_at[v]), ZERO)
            if inflow[v] - outflow[v] != need:
                raise AlgorithmInvariantError(f"(i) flow does not meet demands at {v}")
        for v, subs in self.sinks_at.items():
            if not subs:
                continue
            if len(self.inc[v]) < 2:
                raise AlgorithmInvariantError(f"(ii) sink vertex {v} has fewer than two incoming arcs")
            irregular = [s for s in subs if any(self.y[a] >= s.demand for a in self.inc[v])]
            if len(irregular) > 1:
                raise AlgorithmInvariantError(f"(ii) several irregular sinks at {v}")
            if irregular:
                if self.out[v]:
                    raise AlgorithmInvariantError(f"(ii) irregular sink at {v} with outgoing arcs")
                if len(subs) < 2:
                    raise AlgorithmInvariantError(f"(ii) irregular sink at {v} without a regular one")
        if self.mode == "modified":
            active = defaultdict(int)
            for s in self.inst.sources:
                if self.out[s]:
                    active[self._find(("s", s))] += 1
            for t in {s.sink for s in self.pending()}:
                active[self._find(("t", t))] += 1
            if any(c > 1 for c in active.values()):
                raise AlgorithmInvariantError("component with two active sources/sinks")

    # ------------------------------------------------------------------ run
    def run(self, max_iterations=None):
        self.preliminary_phase()
        limit = max_iterations or 50 + 4 * (len(self.y) + 1) * (len(self.inst.vertices) + len(self.inst.sinks) + 1)
        while not self.done():
            self.iteration += 1
            if self.iteration > limit:
                raise AlgorithmInvariantError("iteration limit exceeded")
            self.label()
            if self.debug:
                self.check_invariants()
            self._moved_singular = set()
            structure = self.find_structure()
            if isinstance(structure, NiceCycle):
                self.augment_nice_cycle(structure)
            else:
                self.route_singular_digraph(structure)
            self.move_sinks()
            if self.debug:
                stale = [a for a in self._moved_singular if self.live(a)]
                if stale:
                    raise AlgorithmInvariantError(f"(iii) singular arcs survive a move: {stale}")
        if self.debug:
            self.check_invariants()
        return self

    def solution(self) -> UnsplittableSolution:
        merged = {}
        for sub in self.delivered:
            arcs = tuple(a for a in reversed(sub.trace) if not isinstance(a, DummyArc))
            key = (sub.source, sub.sink)
            if key in merged:
                if merged[key][0] != arcs:
                    raise AlgorithmInvariantError(f"two different paths for pair {key}")
                merged[key][1] += sub.demand
            else:
                merged[key] = [arcs, sub.demand]
        order = sorted(merged, key=lambda k: (self.vkey[k[1]], self.vkey[k[0]]))
        return UnsplittableSolution([PathFlow(s, t, merged[(s, t)][1], merged[(s, t)][0]) for s, t in order])


def _prepare(inst, x):
    problems = transshipment_violations(inst, x)
    if problems:
        raise NotATransshipment("; ".join(problems[:3]))
    return cancel_cycles(inst, x)


def _run(inst, x, *, mode, direction, variant, debug, bound):
    state = SolverState(inst, x, mode=mode, direction=direction, debug=debug).run()
    return SolveResult(state.solution(), state.iteration, state.events, inst.d_max,
                       variant, bound, inst, dict(x))


def solve_modified_dgg(inst: Instance, x, debug=False) -> SolveResult:
    """Unsplittable transshipment with flow < x_a + d_max on every arc."""
    x = _prepare(inst, x)
    return _run(inst, x, mode="modified", direction="upper", variant="upper", debug=debug, bound=inst.d_max)


def solve_lower_bound(inst: Instance, x, debug=False) -> SolveResult:
    """Same pipeline with reversed augmentation: flow > x_a - d_max on every arc."""
    x = _prepare(inst, x)
    return _run(inst, x, mode="modified", direction="lower", variant="lower", debug=debug, bound=inst.d_max)


def solve_dgg_ssuf(inst: Instance, x, debug=False) -> SolveResult:
    """Classical single-source run rooted at the unique source."""
    if len(inst.sources) != 1:
        raise ValueError("instance must have exactly one source")
    x = _prepare(inst, x)
    return _run(inst, x, mode="original", direction="upper", variant="ssuf", debug=debug, bound=inst.d_max)


def solve_reversed(inst: Instance, x, debug=False) -> SolveResult:
    """Run on the arc-reversed instance; flow < x_a + max supply on every arc."""
    x = _prepare(inst, x)
    rev = inst.reversed()
    state = SolverState(rev, x, mode="modified", direction="upper", debug=debug).run()
    paths = [PathFlow(p.sink, p.source, p.value, tuple(reversed(p.arcs))) for p in state.solution().paths]
    paths.sort(key=lambda p: (inst.index[p.sink], inst.index[p.source]))
    return SolveResult(UnsplittableSolution(paths), state.iteration, state.events, inst.d_max,
                       "reversed", inst.max_supply, inst, dict(x))


def solve_auto(inst: Instance, x, debug=False) -> SolveResult:
    """Pick the orientation whose guarantee, min(max supply, max demand), is smaller."""
    if inst.max_supply < inst.d_max:
        return solve_reversed(inst, x, debug)
    return solve_modified_dgg(inst, x, debug)


VARIANTS = {
    "upper": solve_modified_dgg,
    "lower": solve_lower_bound,
    "reversed": solve_reversed,
    "auto": solve_auto,
    "ssuf": solve_dgg_ssuf,
}
