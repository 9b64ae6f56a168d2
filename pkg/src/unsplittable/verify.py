"""Certificate checks for unsplittable solutions and brute-force oracles.

The checks never trust the solver: they recompute everything from the instance
and the path list.  The oracles enumerate path structures exhaustively and hand
each one to an exact LP, so they are only usable on small instances; beyond the
scale guard they refuse with :class:`ScaleError` instead of guessing.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .graph import ZERO, Instance, PathFlow, UnsplittableSolution, excesses
from .lp import linprog, milp

MAX_PATHS_PER_PAIR = 256
MAX_NODES = 20000


class ScaleError(RuntimeError):
    """The instance is too large for exhaustive enumeration."""


@dataclass
class Check:
    name: str
    passed: bool
    witness: object = None
    detail: str = ""


@dataclass
class CheckReport:
    checks: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, passed, witness=None, detail=""):
        if not passed and witness is None:
            raise ValueError(f"failing check {name} needs a witness")
        self.checks.append(Check(name, passed, witness, detail))

    def merge(self, other: "CheckReport") -> "CheckReport":
        self.checks += other.checks
        self.stats.update(other.stats)
        return self

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _fmt(v):
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return str(v)


def render(report: CheckReport, style: str = "text") -> str:
    lines = []
    for c in report.checks:
        verdict = "pass" if c.passed else "fail"
        if style == "kv":
            lines.append(f"check.{c.name}={verdict}")
            if not c.passed:
                lines.append(f"witness.{c.name}={c.witness}")
        else:
            extra = f"  witness={c.witness}" if not c.passed else ""
            detail = f"  ({c.detail})" if c.detail else ""
            lines.append(f"{c.name:<16} {verdict}{extra}{detail}")
    for k, v in report.stats.items():
        lines.append(f"{k}={_fmt(v)}" if style == "kv" else f"{k:<16} {_fmt(v)}")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ checks
def check_unsplittable(inst: Instance, sol: UnsplittableSolution) -> CheckReport:
    """Pair uniqueness, well-formed simple source-sink paths, exact balances."""
    rep = CheckReport()
    seen, dup = set(), None
    for p in sol.paths:
        if (p.source, p.sink) in seen and dup is None:
            dup = (p.source, p.sink)
        seen.add((p.source, p.sink))
    rep.add("pairs", dup is None, dup)

    bad = None
    for i, p in enumerate(sol.paths):
        problem = _path_problem(inst, p)
        if problem:
            bad = (i, problem)
            break
    rep.add("paths", bad is None, bad)

    flow = sol.flow() if bad is None else {}
    wrong = None
    if bad is None:
        for v, ex in excesses(inst, flow).items():
            if ex != inst.b(v):
                wrong = v
                break
    else:
        wrong = "paths malformed"
    rep.add("balance", wrong is None, wrong)
    rep.stats["paths"] = len(sol.paths)
    return rep


def _path_problem(inst: Instance, p: PathFlow) -> str:
    if p.value <= 0:
        return "non-positive value"
    if inst.b(p.source) <= 0:
        return f"{p.source} is not a source"
    if inst.b(p.sink) >= 0:
        return f"{p.sink} is not a sink"
    if not p.arcs:
        return "empty path"
    for a in p.arcs:
        if a not in inst.arc:
            return f"unknown arc {a}"
    if inst.arc[p.arcs[0]].tail != p.source or inst.arc[p.arcs[-1]].head != p.sink:
        return "endpoints do not match"
    for a, b in zip(p.arcs, p.arcs[1:]):
        if inst.arc[a].head != inst.arc[b].tail:
            return f"arcs {a} and {b} are not consecutive"
    verts = p.vertices(inst)
    if len(set(verts)) != len(verts):
        return "path repeats a vertex"
    return ""


def check_capacity(inst: Instance, flow) -> CheckReport:
    rep = CheckReport()
    over = [a.id for a in inst.arcs if flow.get(a.id, ZERO) > a.capacity]
    rep.add("capacity", not over, over[0] if over else None)
    rep.stats["congestion"] = congestion(inst, flow)
    return rep


def congestion(inst: Instance, flow):
    """Max flow/capacity ratio; ``inf`` if a zero-capacity arc carries flow."""
    worst = ZERO
    for a in inst.arcs:
        f = flow.get(a.id, ZERO)
        if not f:
            continue
        if a.capacity == 0:
            return float("inf")
        worst = max(worst, f / a.capacity)
    return worst


def check_dgg_bound(inst: Instance, x, sol: UnsplittableSolution, direction: str = "upper",
                    bound=None) -> CheckReport:
    """Strict per-arc bound: ``flow < x + bound`` (upper) or ``flow > x - bound`` (lower)."""
    if direction not in ("upper", "lower"):
        raise ValueError(direction)
    bound = inst.d_max if bound is None else Fraction(bound)
    flow = sol.flow()
    rep = CheckReport()
    tight, slack = None, None
    for a in inst.arcs:
        diff = flow.get(a.id, ZERO) - x.get(a.id, ZERO)
        s = bound - diff if direction == "upper" else diff + bound
        if slack is None or s < slack:
            tight, slack = a.id, s
    ok = slack is None or slack > 0
    rep.add(f"bound_{direction}", ok, tight if not ok else None,
            f"tight arc {tight}, slack {_fmt(slack)}" if tight is not None else "no arcs")
    diffs = [flow.get(a.id, ZERO) - x.get(a.id, ZERO) for a in inst.arcs]
    rep.stats["max_increase"] = max(diffs, default=ZERO)
    rep.stats["max_decrease"] = -min(diffs, default=ZERO)
    rep.stats["bound"] = bound
    return rep


def check_confluence(inst: Instance, sol: UnsplittableSolution) -> CheckReport:
    """Per sink, the arcs of its paths must form an in-tree rooted at the sink."""
    rep = CheckReport()
    union = defaultdict(set)
    for p in sol.paths:
        union[p.sink].update(p.arcs)
    witness = None
    for t, arcs in union.items():
        out = defaultdict(set)
        for a in arcs:
            out[inst.arc[a].tail].add(a)
        for v, outs in out.items():
            if v == t or len(outs) > 1:
                witness = (t, v)
                break
        if witness:
            break
    rep.add("confluence", witness is None, witness)
    return rep


def check_bipartite_tree(inst: Instance, sol: UnsplittableSolution) -> CheckReport:
    """The source-sink graph of the solution is a forest with few edges."""
    rep = CheckReport()
    parent = {}

    def find(k):
        while parent.get(k, k) != k:
            parent[k] = parent.get(parent[k], parent[k])
            k = parent[k]
        return k

    cycle = None
    edges = set()
    for p in sol.paths:
        e = (p.source, p.sink)
        if e in edges:
            continue
        edges.add(e)
        a, b = find(("s", p.source)), find(("t", p.sink))
        if a == b:
            cycle = cycle or e
        else:
            parent[a] = b
    rep.add("forest", cycle is None, cycle)
    limit = len(inst.sources) + len(inst.sinks) - 1
    rep.add("path_count", len(edges) <= max(limit, 0), len(edges) if len(edges) > limit else None,
            f"{len(edges)} <= {limit}")
    return rep


def verify_solution(inst: Instance, sol: UnsplittableSolution, x=None, direction="upper",
                    bound=None, capacity=False) -> CheckReport:
    rep = check_unsplittable(inst, sol)
    rep.merge(check_confluence(inst, sol))
    rep.merge(check_bipartite_tree(inst, sol))
    if x is not None and not rep.failures():
        rep.merge(check_dgg_bound(inst, x, sol, direction, bound))
    if not rep["paths"].passed:
        return rep
    cap = check_capacity(inst, sol.flow())
    if capacity:
        rep.merge(cap)
    else:
        rep.stats.update(cap.stats)
    return rep


# ------------------------------------------------------------------ oracles
@dataclass
class OracleResult:
    feasible: bool
    value: Fraction | None = None
    solution: UnsplittableSolution | None = None
    structures: int = 0
    nodes: int = 0


def simple_paths(inst: Instance, s, t, limit=MAX_PATHS_PER_PAIR) -> list:
    """All simple ``s``-``t`` paths as arc-id tuples, in DFS order by arc index."""
    out = []
    stack = [(s, (), {s})]
    while stack:
        v, arcs, seen = stack.pop()
        if v == t:
            out.append(arcs)
            if len(out) > limit:
                raise ScaleError(f"more than {limit} paths from {s} to {t}")
            continue
        for a in reversed(inst.out_arcs[v]):
            w = inst.arc[a].head
            if w not in seen:
                stack.append((w, arcs + (a,), seen | {w}))
    return out


def _pair_slots(inst: Instance):
    slots = []
    for s in inst.sources:
        for t in inst.sinks:
            paths = simple_paths(inst, s, t)
            if paths:
                slots.append([{(s, t): p} for p in paths])
    return slots


def _intrees(inst: Instance, t):
    """Every next-hop choice on the vertices that lie between a source and ``t``."""
    reach_t = {t}
    changed = True
    while changed:
        changed = False
        for a in inst.arcs:
            if a.head in reach_t and a.tail not in reach_t:
                reach_t.add(a.tail)
                changed = True
    from_src = set(inst.sources)
    changed = True
    while changed:
        changed = False
        for a in inst.arcs:
            if a.tail in from_src and a.head not in from_src:
                from_src.add(a.head)
                changed = True
    middle = [v for v in inst.vertices if v in reach_t and v in from_src and v != t]
    choices = [[a for a in inst.out_arcs[v] if inst.arc[a].head in reach_t] for v in middle]
    size = 1
    for c in choices:
        size *= len(c)
        if size > MAX_NODES * 50:
            raise ScaleError(f"too many in-trees for sink {t}")
    trees = []
    for pick in product(*choices):
        nxt = dict(zip(middle, pick))
        option, ok = {}, True
        for s in inst.sources:
            if s not in nxt:
                continue
            v, arcs, seen = s, [], {s}
            while v != t:
                a = nxt[v]
                arcs.append(a)
                v = inst.arc[a].head
                if v in seen:
                    ok = False
                    break
                seen.add(v)
            if not ok:
                break
            option[(s, t)] = tuple(arcs)
        if ok and option:
            trees.append(option)
    return trees


def _confluent_slots(inst: Instance):
    return [opts for t in inst.sinks if (opts := _intrees(inst, t))]


class _Search:
    """Depth-first search over one option per slot, pruned by LP relaxations."""

    def __init__(self, inst, slots, *, x=None, integral=False):
        self.inst = inst
        self.slots = sorted(slots, key=len)
        self.x = x
        self.integral = integral
        self.nodes = 0
        self.structures = 1
        for s in self.slots:
            self.structures *= len(s)

    def _lp(self, chosen, cutoff=None):
        """LP over the fixed choices plus every option of the remaining slots."""
        inst = self.inst
        cols = []  # (pair, arcs)
        for option in chosen:
            cols += list(option.items())
        for slot in self.slots[len(chosen):]:
            seen = set()
            for option in slot:
                for item in option.items():
                    if item not in seen:
                        seen.add(item)
                        cols.append(item)
        violation = self.x is not None
        nv = len(cols) + (1 if violation else 0)
        A_eq, b_eq = [], []
        for s in inst.sources:
            A_eq.append([Fraction(1) if p[0] == s else ZERO for p, _ in cols] + [ZERO] * (nv - len(cols)))
            b_eq.append(inst.b(s))
        for t in inst.sinks:
            A_eq.append([Fraction(1) if p[1] == t else ZERO for p, _ in cols] + [ZERO] * (nv - len(cols)))
            b_eq.append(-inst.b(t))
        A_ub, b_ub = [], []
        for a in inst.arcs:
            row = [Fraction(1) if a.id in arcs else ZERO for _, arcs in cols]
            if violation:
                A_ub.append(row + [Fraction(-1)])
                b_ub.append(self.x.get(a.id, ZERO))
            elif any(row):
                A_ub.append(row)
                b_ub.append(a.capacity)
        c = [ZERO] * len(cols) + ([Fraction(1)] if violation else [])
        free = [len(cols)] if violation else []
        complete = len(chosen) == len(self.slots)
        if complete and self.integral:
            try:
                res = milp(c, A_ub, b_ub, A_eq, b_eq, integral=range(len(cols)), free=free,
                           cutoff=cutoff, node_limit=MAX_NODES)
            except RuntimeError as exc:
                raise ScaleError(str(exc)) from None
        else:
            res = linprog(c, A_ub, b_ub, A_eq, b_eq, free=free)
        return res, cols

    def _solution(self, res, cols):
        per_pair = {}
        for (pair, arcs), v in zip(cols, res.x):
            if v > 0:
                if pair in per_pair and per_pair[pair][0] != arcs:
                    return None
                per_pair[pair] = (arcs, per_pair.get(pair, (arcs, ZERO))[1] + v)
        idx = self.inst.index
        order = sorted(per_pair, key=lambda p: (idx[p[1]], idx[p[0]]))
        return UnsplittableSolution([PathFlow(s, t, per_pair[(s, t)][1], per_pair[(s, t)][0])
                                     for s, t in order])

    def _consistent(self, res, cols):
        """A relaxation optimum using one path per pair (and integral if needed) is a real solution."""
        if self.integral and any(v.denominator != 1 for v in res.x[: len(cols)]):
            return None
        return self._solution(res, cols)

    def run(self) -> OracleResult:
        best = None  # (value, solution)
        stack = [[]]
        while stack:
            chosen = stack.pop()
            self.nodes += 1
            if self.nodes > MAX_NODES:
                raise ScaleError(f"search exceeded {MAX_NODES} nodes")
            cutoff = best[0] if best is not None and self.x is not None else None
            res, cols = self._lp(chosen, cutoff)
            if not res.ok:
                continue
            if cutoff is not None and res.value >= cutoff:
                continue
            sol = self._consistent(res, cols)
            if sol is not None and (len(chosen) == len(self.slots) or self._respects_slots(sol)):
                best = (res.value, sol)
                if self.x is None:
                    break
                continue
            if len(chosen) == len(self.slots):
                continue
            for option in reversed(self.slots[len(chosen)]):
                stack.append(chosen + [option])
        if best is None:
            return OracleResult(False, None, None, self.structures, self.nodes)
        value = best[0] if self.x is not None else None
        return OracleResult(True, value, best[1], self.structures, self.nodes)

    def _respects_slots(self, sol) -> bool:
        """A relaxed solution counts only if each slot has one option covering it."""
        used = {(p.source, p.sink): p.arcs for p in sol.paths}
        for slot in self.slots:
            keys = set().union(*(o.keys() for o in slot))
            if not any(all(used.get(k) in (None, o.get(k)) for k in keys) for o in slot):
                return False
        return True


def brute_force_feasible(inst: Instance, integral_only: bool = False,
                         confluent: bool = False) -> OracleResult:
    """Exhaustively decide whether a capacity-feasible unsplittable transshipment exists."""
    if inst.total_demand == 0:
        return OracleResult(True, None, UnsplittableSolution([]))
    slots = _confluent_slots(inst) if confluent else _pair_slots(inst)
    return _Search(inst, slots, integral=integral_only).run()


def min_violation_oracle(inst: Instance, x, confluent: bool = False) -> OracleResult:
    """Minimum over unsplittable transshipments of ``max_a (flow_a - x_a)``, exactly.

    Capacities are ignored; ``confluent`` restricts to per-sink in-trees.
    """
    slots = _confluent_slots(inst) if confluent else _pair_slots(inst)
    return _Search(inst, slots, x=x).run()
