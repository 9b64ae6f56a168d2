"""Routing all demands in a bounded number of capacity-feasible rounds.

The fractional flow is spread evenly over ``n+1`` copies of the network, the
unsplittable solver is run once on the copied network, and sinks are grouped
into rounds by how their demand ended up distributed over the copies.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

from .graph import ZERO, Arc, Instance, PathFlow, UnsplittableSolution, cancel_cycles
from .graph import transshipment_violations
from .solver import AlgorithmInvariantError, solve_modified_dgg
from .verify import CheckReport

SCHEMES = ("general", "six", "four")


class PreconditionError(ValueError):
    pass


def choose_n(d_max, c_min) -> int:
    """Smallest ``n >= 2`` with ``d_max <= (1 - 1/n) c_min``."""
    d_max = Fraction(d_max)
    if c_min is None or d_max == 0:
        return 2
    c_min = Fraction(c_min)
    if d_max > c_min:
        raise PreconditionError(f"balance condition violated: d_max {d_max} > c_min {c_min}")
    if d_max == c_min:
        raise PreconditionError("d_max = c_min: boundary case open, no finite round bound known")
    return max(2, math.ceil(c_min / (c_min - d_max)))


def grid_size(n: int) -> int:
    """``M = (n^2 - 1)(n + 1)``; the grid step is ``1/M``."""
    return (n * n - 1) * (n + 1)


def admissible_cells(n: int):
    """Yield every nonnegative ``(n+1)``-tuple with sum in ``[M-(n+1), M]``."""
    m = grid_size(n)
    lo = m - (n + 1)

    def rec(prefix, left, total):
        if left == 1:
            for k in range(max(0, lo - total), m - total + 1):
                yield prefix + (k,)
            return
        for k in range(m - total + 1):
            yield from rec(prefix + (k,), left - 1, total + k)

    yield from rec((), n + 1, 0)


def count_groups(n: int) -> int:
    """Groups per label, counted by enumerating the admissible cells."""
    return sum(1 for _ in admissible_cells(n))


def count_groups_closed_form(n: int, top: int) -> int:
    """``sum_{j=0}^{top} C(M - j + n, n)``; ``top = n+1`` matches the enumeration."""
    m = grid_size(n)
    return sum(math.comb(m - j + n, n) for j in range(top + 1))


def general_round_bound(n: int) -> int:
    return (n + 1) * (count_groups(n) + 1)


@dataclass
class CopiedNetwork:
    base: Instance
    copies: int
    instance: Instance
    flow: dict

    @staticmethod
    def head_source(s):
        return ("S", s, "head")

    @staticmethod
    def super_sink(t):
        return ("T", t, "sink")


def build_copied_network(inst: Instance, x, copies: int) -> CopiedNetwork:
    """``copies`` copies of ``inst`` joined by head-sources and super-sinks."""
    k = Fraction(copies)
    vertices, arcs, bal, flow = [], [], {}, {}
    for alpha in range(1, copies + 1):
        for v in inst.vertices:
            vertices.append((v, alpha))
            bal[(v, alpha)] = ZERO
    for alpha in range(1, copies + 1):
        for a in inst.arcs:
            aid = (a.id, alpha)
            arcs.append(Arc(aid, (a.tail, alpha), (a.head, alpha), a.capacity / k))
            if x.get(a.id, ZERO):
                flow[aid] = x[a.id] / k
    for s in inst.sources:
        head = CopiedNetwork.head_source(s)
        vertices.append(head)
        bal[head] = inst.b(s)
        for alpha in range(1, copies + 1):
            aid = ("feed", s, alpha)
            arcs.append(Arc(aid, head, (s, alpha), inst.b(s) / k))
            flow[aid] = inst.b(s) / k
    for t in inst.sinks:
        sink = CopiedNetwork.super_sink(t)
        vertices.append(sink)
        bal[sink] = inst.b(t)
        for alpha in range(1, copies + 1):
            aid = ("drain", t, alpha)
            arcs.append(Arc(aid, (t, alpha), sink, -inst.b(t) / k))
            flow[aid] = -inst.b(t) / k
    return CopiedNetwork(inst, copies, Instance(tuple(vertices), tuple(arcs), bal), flow)


@dataclass
class SinkClass:
    critical: bool
    label: int
    theta: tuple
    singular_share: Fraction = ZERO


@dataclass
class Round:
    sinks: list
    solution: UnsplittableSolution
    kind: str  # "copy" or "group"
    key: tuple = ()

    @property
    def demand(self) -> Fraction:
        return sum((p.value for p in self.solution.paths), ZERO)


@dataclass
class RoundPlan:
    scheme: str
    n: int
    copies: int
    rounds: list
    bound: int
    classes: dict = field(default_factory=dict)
    copy_paths: dict = field(default_factory=dict)

    @property
    def stats(self) -> dict:
        crit = sum(1 for c in self.classes.values() if c.critical)
        return {
            "scheme": self.scheme,
            "n": self.n,
            "copies": self.copies,
            "rounds": len(self.rounds),
            "round_bound": self.bound,
            "critical_sinks": crit,
            "sinks": len(self.classes),
        }


def _classify(inst: Instance, net: CopiedNetwork, result):
    """Per sink: critically split flag, label, demand share per copy."""
    copies = net.copies
    per_copy = defaultdict(lambda: [ZERO] * copies)
    paths = {}  # (s, t) -> (alpha, base arcs, value)
    for p in result.solution.paths:
        s, t = p.source[1], p.sink[1]
        alpha = p.arcs[0][2]
        base = tuple(a[0] for a in p.arcs[1:-1])
        if p.arcs[-1] != ("drain", t, alpha) or any(a[1] != alpha for a in p.arcs[1:-1]):
            raise AlgorithmInvariantError(f"path for ({s}, {t}) leaves its copy")
        paths[(s, t)] = (alpha, base, p.value)
        per_copy[t][alpha - 1] += p.value

    seen_arcs = set()
    label = {}
    for ev in result.events:
        if ev.kind != "singular_digraph":
            continue
        arcs = set(ev.data["arcs"])
        if arcs & seen_arcs:
            raise AlgorithmInvariantError("copy arc reused by two singular digraphs")
        seen_arcs |= arcs
        root = ev.data["root"]
        if isinstance(root, tuple) and len(root) == 3 and root[2] == "sink":
            entering = ev.data["entering"]
            label[root[1]] = entering[2]

    classes = {}
    for t in inst.sinks:
        d = -inst.b(t)
        theta = tuple(v / d for v in per_copy[t])
        used = [i + 1 for i, v in enumerate(theta) if v > 0]
        if sum(theta) != 1:
            raise AlgorithmInvariantError(f"sink {t} not fully served in the copied network")
        if len(used) > 1:
            if t not in label:
                raise AlgorithmInvariantError(f"sink {t} spans copies without a singular digraph")
            ell = label[t]
            classes[t] = SinkClass(True, ell, theta, 1 - theta[ell - 1])
        else:
            if t in label:
                raise AlgorithmInvariantError(f"sink {t} split at its super-sink but uses one copy")
            classes[t] = SinkClass(False, used[0], theta)
    return classes, paths


def _round(inst, sinks, paths, kind, key) -> Round:
    sinks = sorted(sinks, key=inst.index.get)
    chosen = set(sinks)
    idx = inst.index
    out = [
        PathFlow(s, t, v, arcs)
        for (s, t), (_, arcs, v) in sorted(paths.items(), key=lambda kv: (idx[kv[0][1]], idx[kv[0][0]]))
        if t in chosen
    ]
    return Round(sinks, UnsplittableSolution(out), kind, key)


def _prepare(inst: Instance, x):
    if x is None:
        from .fractional import solve_fractional

        x = solve_fractional(inst)
    problems = transshipment_violations(inst, x, check_capacity=True)
    if problems:
        raise PreconditionError("x is not a feasible b-transshipment: " + "; ".join(problems[:3]))
    return cancel_cycles(inst, x)


def _run(inst, x, copies):
    net = build_copied_network(inst, x, copies)
    result = solve_modified_dgg(net.instance, net.flow)
    classes, paths = _classify(inst, net, result)
    return net, classes, paths


def _copy_rounds(inst, classes, paths, copies):
    rounds = []
    for alpha in range(1, copies + 1):
        sinks = [t for t, c in classes.items() if not c.critical and c.label == alpha]
        if sinks:
            rounds.append(_round(inst, sinks, paths, "copy", (alpha,)))
    return rounds


def _group_rounds(inst, classes, paths, keyfn):
    groups = defaultdict(list)
    for t, c in classes.items():
        if c.critical:
            groups[keyfn(c)].append(t)
    return [_round(inst, groups[k], paths, "group", k) for k in sorted(groups)]


def cell_of(theta, n: int) -> tuple:
    """Grid cell ``floor(theta * M)`` per coordinate; a share of exactly 1 goes to the top cell."""
    m = grid_size(n)
    return tuple(min(math.floor(th * m), m - 1) for th in theta)


def route_general_rounds(inst: Instance, x=None, n: int | None = None) -> RoundPlan:
    """``n+1`` copy rounds plus one round per occupied (label, grid cell) group."""
    c_min, d_max = inst.c_min, inst.d_max
    smallest = choose_n(d_max, c_min)
    if n is None:
        n = smallest
    elif n < smallest:
        raise PreconditionError(f"n = {n} too small: need d_max <= (1 - 1/n) c_min")
    x = _prepare(inst, x)
    copies = n + 1
    net, classes, paths = _run(inst, x, copies)
    m = grid_size(n)
    lo = m - (n + 1)
    for c in classes.values():
        if c.critical:
            total = sum(cell_of(c.theta, n))
            if not lo <= total <= m:
                raise AlgorithmInvariantError(f"share vector falls outside the admissible cells: {total}")
            if c_min is not None:
                u = Fraction(total + n + 1, m)
                if c_min / copies + d_max * u > c_min:
                    raise AlgorithmInvariantError("grid group exceeds the capacity budget")
    rounds = _copy_rounds(inst, classes, paths, copies)
    rounds += _group_rounds(inst, classes, paths, lambda c: (c.label, cell_of(c.theta, n)))
    return RoundPlan("general", n, copies, rounds, general_round_bound(n), classes, paths)


def route_six_rounds(inst: Instance, x=None) -> RoundPlan:
    """Two copies; critically split sinks grouped by label and by singular share >= 1/2."""
    if inst.c_min is not None and 3 * inst.d_max > inst.c_min:
        raise PreconditionError("six rounds need d_max <= c_min/3")
    x = _prepare(inst, x)
    net, classes, paths = _run(inst, x, 2)
    rounds = _copy_rounds(inst, classes, paths, 2)
    half = Fraction(1, 2)
    rounds += _group_rounds(inst, classes, paths,
                            lambda c: (c.label, 1 if c.singular_share >= half else 2))
    return RoundPlan("six", 1, 2, rounds, 6, classes, paths)


def route_four_rounds(inst: Instance, x=None) -> RoundPlan:
    """Two copies; critically split sinks grouped by label only."""
    if inst.c_min is not None and 4 * inst.d_max > inst.c_min:
        raise PreconditionError("four rounds need d_max <= c_min/4")
    x = _prepare(inst, x)
    net, classes, paths = _run(inst, x, 2)
    rounds = _copy_rounds(inst, classes, paths, 2)
    rounds += _group_rounds(inst, classes, paths, lambda c: (c.label,))
    return RoundPlan("four", 1, 2, rounds, 4, classes, paths)


ROUTERS = {"general": route_general_rounds, "six": route_six_rounds, "four": route_four_rounds}


def _as_rounds(plan):
    rounds = plan.rounds if isinstance(plan, RoundPlan) else plan
    out = []
    for r in rounds:
        if isinstance(r, Round):
            out.append((list(r.sinks), r.solution))
        else:
            sinks, sol = r
            out.append((list(sinks), sol))
    return out


def verify_round_plan(inst: Instance, plan) -> CheckReport:
    """Partition of the sinks, per-round exact service and capacity, supply ledger."""
    from .verify import _path_problem

    rounds = _as_rounds(plan)
    rep = CheckReport()
    owner, dup = {}, None
    for i, (sinks, _) in enumerate(rounds):
        for t in sinks:
            if t in owner and dup is None:
                dup = t
            owner.setdefault(t, i)
    missing = [t for t in inst.sinks if t not in owner]
    stray = [t for t in owner if t not in inst.sinks]
    witness = dup if dup is not None else (missing[0] if missing else (stray[0] if stray else None))
    detail = "sink in two rounds" if dup is not None else ("sink never routed" if missing else "")
    rep.add("partition", witness is None, witness, "not a partition: " + detail if witness is not None else "")

    bad_path = bad_service = over = None
    for i, (sinks, sol) in enumerate(rounds):
        pairs = set()
        served = defaultdict(Fraction)
        for p in sol.paths:
            problem = _path_problem(inst, p)
            if (p.source, p.sink) in pairs:
                problem = "two paths for one pair"
            pairs.add((p.source, p.sink))
            if p.sink not in sinks:
                problem = f"path to {p.sink} which is not in the round"
            if problem and bad_path is None:
                bad_path = (i, p.source, p.sink, problem)
            served[p.sink] += p.value
        for t in sinks:
            if t in inst.index and served[t] != -inst.b(t) and bad_service is None:
                bad_service = (i, t)
        if bad_path is None:
            flow = sol.flow()
            for a in inst.arcs:
                if flow.get(a.id, ZERO) > a.capacity and over is None:
                    over = (i, a.id)
    rep.add("paths", bad_path is None, bad_path)
    rep.add("service", bad_service is None, bad_service)
    rep.add("capacity", over is None, over)

    used = defaultdict(Fraction)
    exceeded = None
    for i, (_, sol) in enumerate(rounds):
        for p in sol.paths:
            used[p.source] += p.value
        for s, v in used.items():
            if v > inst.b(s) and exceeded is None:
                exceeded = (i, s)
    rep.add("supply", exceeded is None, exceeded and f"supply exceeded at {exceeded[1]} in round {exceeded[0]}")
    short = [s for s in inst.sources if used[s] != inst.b(s)]
    rep.add("supply_total", not short, short[0] if short else None)
    rep.stats["rounds"] = len(rounds)
    return rep


def best_round(plan):
    """``(index, routed demand)`` of the round serving the most demand; ties go to the lowest index."""
    rounds = _as_rounds(plan)
    if not rounds:
        raise ValueError("empty plan")
    best, best_val = 0, None
    for i, (_, sol) in enumerate(rounds):
        val = sum((p.value for p in sol.paths), ZERO)
        if best_val is None or val > best_val:
            best, best_val = i, val
    return best, best_val
