"""Exact two-phase simplex over Fractions, with Bland's rule, and a small branch and bound.

Sized for desk-scale oracles (tens of variables); dense tableaus throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

ZERO = Fraction(0)


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: list | None = None
    value: Fraction | None = None

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


def _pivot(T, obj, basis, r, j):
    row = T[r]
    p = row[j]
    if p != 1:
        T[r] = row = [v / p for v in row]
    for i, other in enumerate(T):
        if i != r and other[j]:
            f = other[j]
            T[i] = [a - f * b for a, b in zip(other, row)]
    if obj[j]:
        f = obj[j]
        obj[:] = [a - f * b for a, b in zip(obj, row)]
    basis[r] = j


def _iterate(T, obj, basis, allowed):
    """Minimise; ``obj`` holds reduced costs and ``-value`` in its last slot."""
    while True:
        enter = next((j for j in allowed if obj[j] < 0), None)
        if enter is None:
            return "optimal"
        best, leave = None, None
        for i, row in enumerate(T):
            if row[enter] > 0:
                ratio = row[-1] / row[enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            return "unbounded"
        _pivot(T, obj, basis, leave, enter)


def _standard_form(n, A_ub, b_ub, A_eq, b_eq):
    rows, rhs = [], []
    n_slack = len(A_ub)
    for k, (a, b) in enumerate(zip(A_ub, b_ub)):
        row = [Fraction(v) for v in a] + [ZERO] * n_slack
        row[n + k] = Fraction(1)
        rows.append(row)
        rhs.append(Fraction(b))
    for a, b in zip(A_eq, b_eq):
        rows.append([Fraction(v) for v in a] + [ZERO] * n_slack)
        rhs.append(Fraction(b))
    for i in range(len(rows)):
        if rhs[i] < 0:
            rows[i] = [-v for v in rows[i]]
            rhs[i] = -rhs[i]
    return rows, rhs, n + n_slack


def linprog(c, A_ub=(), b_ub=(), A_eq=(), b_eq=(), free=()) -> LPResult:
    """Minimise ``c.x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``.

    Variables are nonnegative except those listed in ``free``, which are split
    into a difference of two nonnegative parts internally.
    """
    n0 = len(c)
    free = sorted(set(free))
    if free:
        ext = lambda row: list(row) + [-row[j] for j in free]  # noqa: E731
        c = ext(c)
        A_ub = [ext(r) for r in A_ub]
        A_eq = [ext(r) for r in A_eq]
    n = len(c)
    rows, rhs, width = _standard_form(n, list(A_ub), list(b_ub), list(A_eq), list(b_eq))
    m = len(rows)
    # phase one: one artificial per row
    T = [rows[i] + [Fraction(1) if k == i else ZERO for k in range(m)] + [rhs[i]] for i in range(m)]
    basis = [width + i for i in range(m)]
    obj = [ZERO] * (width + m + 1)
    for row in T:
        for j in range(width):
            obj[j] -= row[j]
        obj[-1] -= row[-1]
    _iterate(T, obj, basis, range(width + m))
    if obj[-1] != 0:
        return LPResult("infeasible")
    # drive artificials out of the basis, dropping redundant rows
    i = 0
    while i < len(T):
        if basis[i] >= width:
            j = next((j for j in range(width) if T[i][j] != 0), None)
            if j is None:
                del T[i], basis[i]
                continue
            _pivot(T, obj, basis, i, j)
        i += 1
    T = [row[:width] + [row[-1]] for row in T]
    cost = [Fraction(v) for v in c] + [ZERO] * (width - n)
    obj = cost + [ZERO]
    for r, b in enumerate(basis):
        if obj[b]:
            f = obj[b]
            obj = [a - f * v for a, v in zip(obj, T[r])]
    status = _iterate(T, obj, basis, range(width))
    if status != "optimal":
        return LPResult(status)
    x = [ZERO] * width
    for r, b in enumerate(basis):
        x[b] = T[r][-1]
    x = x[:n]
    if free:
        for k, j in enumerate(free):
            x[j] -= x[n0 + k]
        x = x[:n0]
    value = sum((Fraction(ci) * xi for ci, xi in zip(c[:n0], x)), ZERO)
    return LPResult("optimal", x, value)


def milp(c, A_ub=(), b_ub=(), A_eq=(), b_eq=(), integral=(), free=(), cutoff=None,
         node_limit=100000) -> LPResult:
    """Depth-first branch and bound; ``integral`` lists integer variables.

    Returns the optimum, or ``infeasible``.  With ``cutoff`` only solutions of
    value strictly below it are searched for.  Raises ``RuntimeError`` when the
    node limit is hit, so callers never mistake a truncated search for a result.
    """
    A_ub, b_ub = list(A_ub), list(b_ub)
    n = len(c)
    best = None
    stack = [[]]  # extra bound rows: (row, rhs)
    nodes = 0
    while stack:
        extra = stack.pop()
        nodes += 1
        if nodes > node_limit:
            raise RuntimeError("branch and bound node limit exceeded")
        res = linprog(c, A_ub + [r for r, _ in extra], b_ub + [b for _, b in extra], A_eq, b_eq, free)
        if not res.ok:
            continue
        limit = best.value if best is not None else cutoff
        if limit is not None and res.value >= limit:
            continue
        frac = next((j for j in integral if res.x[j].denominator != 1), None)
        if frac is None:
            best = res
            continue
        v = res.x[frac]
        unit = [ZERO] * n
        unit[frac] = Fraction(1)
        neg = [-u for u in unit]
        stack.append(extra + [(neg, -Fraction(math.ceil(v)))])
        stack.append(extra + [(unit, Fraction(math.floor(v)))])
    return best if best is not None else LPResult("infeasible")
