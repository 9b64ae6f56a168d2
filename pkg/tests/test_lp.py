from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog as scipy_linprog

from unsplittable.lp import linprog, milp

F = Fraction
PROPS = settings(max_examples=80, deadline=None, suppress_health_check=[HealthCheck.too_slow])
small = st.integers(-4, 4)


def test_textbook_max():
    # max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
    res = linprog([-3, -5], [[1, 0], [0, 2], [3, 2]], [4, 12, 18])
    assert res.ok and res.x == [2, 6] and res.value == -36


def test_infeasible_and_unbounded():
    assert linprog([1], [[1]], [-1]).status == "infeasible"
    assert linprog([-1], [[-1]], [0]).status == "unbounded"


def test_equality_and_free_variable():
    # min y with x + y = 1, x <= 3, y free -> y = -2
    res = linprog([0, 1], [[1, 0]], [3], [[1, 1]], [1], free=[1])
    assert res.ok and res.value == -2


def test_fraction_exactness():
    res = linprog([-1, -1], [[3, 1], [1, 3]], [1, 1])
    assert res.x == [F(1, 4), F(1, 4)]


@PROPS
@given(st.integers(2, 3), st.integers(1, 3), st.data())
def test_matches_scipy(n, m, data):
    c = data.draw(st.lists(small, min_size=n, max_size=n))
    A = [data.draw(st.lists(small, min_size=n, max_size=n)) for _ in range(m)]
    b = data.draw(st.lists(st.integers(0, 6), min_size=m, max_size=m))
    # box keeps every instance bounded
    A_box = A + [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    b_box = b + [5] * n
    ours = linprog(c, A_box, b_box)
    ref = scipy_linprog(c, A_ub=A_box, b_ub=b_box, bounds=[(0, None)] * n, method="highs")
    assert ours.ok == (ref.status == 0)
    if ours.ok:
        assert abs(float(ours.value) - ref.fun) < 1e-7


@PROPS
@given(st.integers(2, 3), st.data())
def test_milp_matches_enumeration(n, data):
    c = data.draw(st.lists(small, min_size=n, max_size=n))
    A = [data.draw(st.lists(small, min_size=n, max_size=n)) for _ in range(2)]
    b = data.draw(st.lists(st.integers(0, 6), min_size=2, max_size=2))
    A_box = A + [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    b_box = b + [3] * n
    res = milp(c, A_box, b_box, integral=range(n))
    best = None
    for pt in itertools.product(range(4), repeat=n):
        if all(sum(a * v for a, v in zip(row, pt)) <= r for row, r in zip(A_box, b_box)):
            val = sum(ci * v for ci, v in zip(c, pt))
            best = val if best is None else min(best, val)
    if best is None:
        assert res.status == "infeasible"
    else:
        assert res.ok and res.value == best
        assert all(v.denominator == 1 for v in res.x)


def test_milp_node_limit_raises():
    # knapsack-like search that cannot finish in 2 nodes
    with pytest.raises(RuntimeError):
        milp([-2, -3, -4], [[3, 4, 5]], [F(15, 2)], integral=[0, 1, 2], node_limit=2)
