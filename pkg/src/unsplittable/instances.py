"""Deterministic instance families and seeded random DAG instances."""

from __future__ import annotations

import random
from fractions import Fraction

from .graph import Arc, Instance, ZERO, excesses

REGIMES = ("quarter", "third", "half", "below", "equal", "free")

# capacity floor as a multiple of d_max; "below" gives d_max = (2/3) c_min
_FLOOR = {
    "quarter": Fraction(4),
    "third": Fraction(3),
    "half": Fraction(2),
    "below": Fraction(3, 2),
    "equal": Fraction(1),
}


def gen_tightness(q: int, k: int):
    """Sinks needing ``d_max`` of extra capacity despite ``k+1`` sources each.

    Sink ``t<j>`` has a dedicated source ``s<j>`` joined by ``q-k`` parallel arcs,
    and each shared source ``s<q+i>`` reaches every sink through the common arc
    ``a<i>`` into hub ``m<i>``.  Returns ``(instance, x)`` with ``1/q`` on every
    arc entering a sink.
    """
    if q < 3 or not q > k + 1 or k < 0:
        raise ValueError("need q >= 3 and q > k + 1")
    frac = Fraction(1, q)
    vertices, arcs, bal, x = [], [], {}, {}
    for j in range(1, q + k + 1):
        vertices.append(f"s{j}")
    for i in range(1, k + 1):
        vertices.append(f"m{i}")
    for j in range(1, q + 1):
        vertices.append(f"t{j}")
        bal[f"t{j}"] = Fraction(-1)
    for j in range(1, q + 1):
        bal[f"s{j}"] = Fraction(q - k, q)
        for r in range(1, q - k + 1):
            arcs.append(Arc(f"p{j}_{r}", f"s{j}", f"t{j}", Fraction(1)))
            x[f"p{j}_{r}"] = frac
    for i in range(1, k + 1):
        src = f"s{q + i}"
        bal[src] = Fraction(1)
        arcs.append(Arc(f"a{i}", src, f"m{i}", Fraction(1)))
        x[f"a{i}"] = Fraction(1)
        for j in range(1, q + 1):
            arcs.append(Arc(f"e{i}_{j}", f"m{i}", f"t{j}", Fraction(1)))
            x[f"e{i}_{j}"] = frac
    inst = Instance(tuple(vertices), tuple(arcs), {v: bal.get(v, ZERO) for v in vertices})
    return inst, x


def gen_cost_of_confluence(q: int):
    """Unit-capacity family where confluence costs ``1 - 1/q`` extra flow on some arc.

    Sources ``s1..sq`` (supply 1) feed a hub ``h``.  Arc ``a<i> = (h, v<i>)`` is the
    only way into sink ``t<i>`` (demand ``1 - 1/q``), and every ``v<i>`` also feeds
    sink ``t<q+1>`` (demand 1).  Spreading ``t<q+1>``'s demand as ``1/q`` over all
    ``a<i>`` is feasible but not confluent: those paths meet at ``h`` and diverge.
    Returns ``(instance, x)`` where ``x`` is that feasible flow.
    """
    if q < 2:
        raise ValueError("need q >= 2")
    one, small = Fraction(1), Fraction(1, q)
    big = f"t{q + 1}"
    vertices = [f"s{j}" for j in range(1, q + 1)] + ["h"]
    vertices += [f"v{i}" for i in range(1, q + 1)] + [f"t{i}" for i in range(1, q + 2)]
    bal = {v: ZERO for v in vertices}
    arcs, x = [], {}
    for j in range(1, q + 1):
        bal[f"s{j}"] = one
        arcs.append(Arc(f"in{j}", f"s{j}", "h", one))
        x[f"in{j}"] = one
    for i in range(1, q + 1):
        bal[f"t{i}"] = -(one - small)
        arcs.append(Arc(f"a{i}", "h", f"v{i}", one))
        arcs.append(Arc(f"d{i}", f"v{i}", f"t{i}", one))
        arcs.append(Arc(f"c{i}", f"v{i}", big, one))
        x[f"a{i}"], x[f"d{i}"], x[f"c{i}"] = one, one - small, small
    bal[big] = -one
    return Instance(tuple(vertices), tuple(arcs), bal), x


def gen_nonintegral():
    """Two sources, two sinks, integral data, only non-integral unsplittable solutions.

    Returns ``(instance, x)``; ``x`` superposes the four paths of value 3/2, 7/2,
    13/2 and 17/2.
    """
    F = Fraction
    vertices = ("s1", "s2", "x1", "x2", "y1", "y2", "t1", "t2")
    bal = {"s1": F(5), "s2": F(15), "t1": F(-8), "t2": F(-12),
           "x1": F(0), "x2": F(0), "y1": F(0), "y2": F(0)}
    rows = [
        ("e1", "s1", "x1", 2, F(3, 2)),
        ("e2", "s1", "y1", 5, F(7, 2)),
        ("e3", "s2", "y1", 8, F(13, 2)),
        ("e4", "s2", "x1", 9, F(17, 2)),
        ("X", "x1", "x2", 10, F(10)),
        ("Y", "y1", "y2", 10, F(10)),
        ("e5", "x2", "t1", 2, F(3, 2)),
        ("e6", "x2", "t2", 9, F(17, 2)),
        ("e7", "y2", "t2", 5, F(7, 2)),
        ("e8", "y2", "t1", 8, F(13, 2)),
    ]
    arcs = tuple(Arc(i, u, v, F(c)) for i, u, v, c, _ in rows)
    return Instance(vertices, arcs, bal), {i: f for i, _, _, _, f in rows}


def gen_from_disjoint_paths(base: Instance, pairs):
    """Reduce arc-disjoint paths on ``base`` to unsplittable transshipment feasibility.

    Every arc gets capacity 1; direct arcs ``(s_i, t_j)``, ``i != j``, are added and
    ``b(s_i) = k``, ``b(t_i) = -k`` for ``k = len(pairs)``.
    """
    pairs = list(pairs)
    k = len(pairs)
    if k < 2:
        raise ValueError("need at least two pairs")
    terminals = [v for p in pairs for v in p]
    if len(set(terminals)) != len(terminals):
        raise ValueError("terminal vertices must be pairwise distinct")
    for v in terminals:
        if v not in base.index:
            raise ValueError(f"unknown terminal {v}")
    one = Fraction(1)
    arcs = [Arc(a.id, a.tail, a.head, one) for a in base.arcs]
    taken = {a.id for a in arcs}
    for i, (s, _) in enumerate(pairs):
        for j, (_, t) in enumerate(pairs):
            if i != j:
                aid = f"r{i + 1}_{j + 1}"
                while aid in taken:
                    aid += "'"
                taken.add(aid)
                arcs.append(Arc(aid, s, t, one))
    bal = {v: ZERO for v in base.vertices}
    for s, t in pairs:
        bal[s], bal[t] = Fraction(k), Fraction(-k)
    return Instance(base.vertices, tuple(arcs), bal)


def _value(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(1, 12), rng.choice((1, 1, 2, 3, 4)))


def gen_random(seed: int, vertices: int = 8, sources: int = 2, sinks: int = 3,
               paths: int = 6, extra_arcs: int = 2, regime: str = "free",
               parallel: float = 0.15, slack: int | None = None):
    """Seeded acyclic instance plus a feasible fractional transshipment.

    The flow is a superposition of random source-sink paths that follow the
    vertex order, so its support is acyclic.  Capacities are at least the flow and
    respect the requested ``regime`` (see ``REGIMES``); each gets a random integer
    extra of at most ``slack`` (default 3 for ``free``, else 2).
    """
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}")
    if vertices < 2 or sources < 1 or sinks < 1 or sources + sinks > vertices:
        raise ValueError("inconsistent sizes")
    rng = random.Random(seed)
    names = [f"v{i}" for i in range(vertices)]
    idx = list(range(vertices))
    src = sorted(rng.sample(idx[: max(sources, (vertices * 3) // 5)], sources))
    rest = [i for i in idx if i not in src and i > src[0]]
    if len(rest) < sinks:
        rest = [i for i in idx if i not in src]
    snk = sorted(rng.sample(rest, sinks))
    arcs, flow = [], {}
    by_pair = {}

    def arc_between(u, v):
        have = by_pair.get((u, v), [])
        if have and rng.random() >= parallel:
            return rng.choice(have)
        aid = f"a{len(arcs)}"
        arcs.append([aid, names[u], names[v]])
        by_pair.setdefault((u, v), []).append(aid)
        return aid

    def add_path(s, t):
        if s > t:
            return
        between = [i for i in range(s + 1, t)]
        mids = sorted(rng.sample(between, min(len(between), rng.randint(0, 3))))
        seq = [s] + mids + [t]
        val = _value(rng)
        for u, v in zip(seq, seq[1:]):
            a = arc_between(u, v)
            flow[a] = flow.get(a, Fraction(0)) + val

    plan = [(s, rng.choice([t for t in snk if t > s] or [None])) for s in src]
    plan += [(rng.choice([s for s in src if s < t] or [None]), t) for t in snk]
    while len(plan) < paths:
        plan.append((rng.choice(src), rng.choice(snk)))
    for s, t in plan:
        if s is not None and t is not None:
            add_path(s, t)
    for _ in range(extra_arcs):
        u, v = sorted(rng.sample(idx, 2))
        arc_between(u, v)

    provisional = Instance(tuple(names), tuple(Arc(a, u, v, Fraction(0)) for a, u, v in arcs), {})
    ex = excesses(provisional, flow)
    bal = {v: ex[v] for v in names}
    d_max = max((-b for b in bal.values() if b < 0), default=Fraction(0))
    if slack is None:
        slack = 3 if regime == "free" else 2
    caps = {}
    for aid, _, _ in arcs:
        f = flow.get(aid, Fraction(0))
        if regime == "free":
            caps[aid] = f + rng.randint(0, slack)
        else:
            caps[aid] = max(f, _FLOOR[regime] * d_max) + rng.randint(0, slack)
    if regime == "equal":
        tight = min(arcs, key=lambda a: flow.get(a[0], Fraction(0)))[0]
        if flow.get(tight, Fraction(0)) > d_max:
            raise ValueError("no arc can carry capacity exactly d_max; add extra arcs")
        caps[tight] = d_max
    inst = Instance(tuple(names), tuple(Arc(a, u, v, caps[a]) for a, u, v in arcs), bal)
    return inst, {a: f for a, f in flow.items()}


def random_corpus(count: int, seed: int = 0, **kwargs):
    """``count`` instances with sizes drawn from the seed; keyword overrides win."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = rng.randint(4, 14)
        params = dict(
            vertices=n,
            sources=rng.randint(1, max(1, n // 3)),
            sinks=rng.randint(1, max(1, n // 3)),
            paths=rng.randint(2, 2 * n),
            extra_arcs=rng.randint(1, 4),
        )
        params.update(kwargs)
        out.append(gen_random(rng.randrange(2**31), **params))
    return out
