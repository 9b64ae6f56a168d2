from __future__ import annotations

from fractions import Fraction
from itertools import product
from pathlib import Path

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from unsplittable.formats import parse_flow, parse_instance
from unsplittable.graph import Instance, PathFlow, UnsplittableSolution, is_transshipment
from unsplittable.instances import gen_random
from unsplittable.rounds import (
    PreconditionError,
    best_round,
    build_copied_network,
    cell_of,
    choose_n,
    count_groups,
    count_groups_closed_form,
    general_round_bound,
    grid_size,
    route_four_rounds,
    route_general_rounds,
    route_six_rounds,
    verify_round_plan,
)

F = Fraction
DATA = Path(__file__).parent / "data"
PROPS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def brute_count(n):
    """Admissible cells by plain product enumeration, independent of the recursive generator."""
    m = grid_size(n)
    return sum(1 for t in product(range(m + 1), repeat=n + 1) if m - (n + 1) <= sum(t) <= m)


class TestCounting:
    def test_choose_n(self):
        assert choose_n(1, 2) == 2
        assert choose_n(2, 3) == 3
        assert choose_n(1, 4) == 2
        assert choose_n(0, 5) == 2
        with pytest.raises(PreconditionError, match="boundary"):
            choose_n(3, 3)
        with pytest.raises(PreconditionError, match="balance"):
            choose_n(4, 3)

    def test_grid(self):
        assert grid_size(2) == 9 and grid_size(3) == 32

    def test_group_count_n2(self):
        assert count_groups(2) == brute_count(2) == 164
        assert count_groups_closed_form(2, 3) == 164
        assert count_groups_closed_form(2, 2) == 136
        assert general_round_bound(2) == 3 * 165

    def test_group_count_n3(self):
        assert count_groups(3) == count_groups_closed_form(3, 4)

    def test_cell_of(self):
        assert cell_of((F(1), F(0), F(0)), 2) == (8, 0, 0)
        assert cell_of((F(1, 3), F(1, 3), F(1, 3)), 2) == (3, 3, 3)
        assert cell_of((F(1, 2), F(1, 2), F(0)), 2) == (4, 4, 0)


def test_copied_network_carries_split_flow():
    inst, x = gen_random(3, vertices=7, sources=2, sinks=2, paths=6, regime="half")
    net = build_copied_network(inst, x, 3)
    assert is_transshipment(net.instance, net.flow, check_capacity=True)
    assert len(net.instance.vertices) == 3 * len(inst.vertices) + len(inst.sources) + len(inst.sinks)
    assert net.instance.arc[(inst.arcs[0].id, 2)].capacity == inst.arcs[0].capacity / 3


def test_six_rounds_full_fixture():
    text = (DATA / "six_rounds_full.txt").read_text()
    inst, x = parse_instance(text), parse_flow(text)
    plan = route_six_rounds(inst, x)
    assert len(plan.rounds) == 6
    assert sorted(r.key for r in plan.rounds if r.kind == "group") == [(1, 1), (1, 2), (2, 1), (2, 2)]
    assert verify_round_plan(inst, plan).passed


def test_four_rounds_full():
    inst, x = gen_random(119, vertices=10, sources=3, sinks=5, paths=30, extra_arcs=2, slack=0,
                         parallel=0.4, regime="quarter")
    plan = route_four_rounds(inst, x)
    assert len(plan.rounds) == 4
    assert verify_round_plan(inst, plan).passed


def test_preconditions():
    inst, x = gen_random(1, vertices=8, sources=2, sinks=3, regime="half")
    with pytest.raises(PreconditionError):
        route_six_rounds(inst, x)
    with pytest.raises(PreconditionError):
        route_four_rounds(inst, x)
    inst, x = gen_random(1, vertices=8, sources=2, sinks=3, regime="below")
    with pytest.raises(PreconditionError, match="too small"):
        route_general_rounds(inst, x, n=2)
    inst, x = gen_random(1, vertices=8, sources=2, sinks=3, paths=6, extra_arcs=3, regime="equal")
    with pytest.raises(PreconditionError):
        route_general_rounds(inst, x)


@PROPS
@given(st.integers(0, 10**6), st.sampled_from(["general", "six", "four"]))
def test_plans_verify(seed, scheme):
    regime = {"general": "half", "six": "third", "four": "quarter"}[scheme]
    inst, x = gen_random(seed, vertices=9, sources=2, sinks=4, paths=14, slack=0, parallel=0.4, regime=regime)
    router = {"general": route_general_rounds, "six": route_six_rounds, "four": route_four_rounds}[scheme]
    plan = router(inst, x)
    assert verify_round_plan(inst, plan).passed
    assert len(plan.rounds) <= plan.bound
    critical_keys = {r.key for r in plan.rounds if r.kind == "group"}
    assert len(plan.rounds) <= plan.copies + len(critical_keys)
    if not any(c.critical for c in plan.classes.values()):
        assert len(plan.rounds) <= plan.copies


def single():
    inst = Instance.build(["s", "t", "u"], [("a", "s", "t", 1), ("b", "s", "u", 1)], {"s": 2, "t": -1, "u": -1})
    to_t = UnsplittableSolution([PathFlow("s", "t", F(1), ("a",))])
    to_u = UnsplittableSolution([PathFlow("s", "u", F(1), ("b",))])
    return inst, to_t, to_u


class TestVerifyRoundPlan:
    def test_good(self):
        inst, to_t, to_u = single()
        assert verify_round_plan(inst, [(["t"], to_t), (["u"], to_u)]).passed

    def test_sink_twice(self):
        inst, to_t, to_u = single()
        rep = verify_round_plan(inst, [(["t"], to_t), (["t"], to_t), (["u"], to_u)])
        assert "not a partition" in rep["partition"].detail
        assert rep["supply"].witness == "supply exceeded at s in round 2"

    def test_sink_missing(self):
        inst, to_t, _ = single()
        rep = verify_round_plan(inst, [(["t"], to_t)])
        assert rep["partition"].witness == "u"
        assert rep["supply_total"].witness == "s"

    def test_capacity_and_service(self):
        inst, to_t, to_u = single()
        over = UnsplittableSolution([PathFlow("s", "t", F(2), ("a",))])
        rep = verify_round_plan(inst, [(["t"], over), (["u"], to_u)])
        assert rep["capacity"].witness == (0, "a")
        assert rep["service"].witness == (0, "t")

    def test_path_outside_round(self):
        inst, to_t, to_u = single()
        rep = verify_round_plan(inst, [(["t"], to_u), (["u"], to_t)])
        assert "not in the round" in rep["paths"].witness[3]


class TestBestRound:
    def test_tie_goes_to_first(self):
        inst, to_t, to_u = single()
        assert best_round([(["t"], to_t), (["u"], to_u)]) == (0, 1)

    def test_empty(self):
        with pytest.raises(ValueError):
            best_round([])

    def test_pigeonhole(self):
        for seed in range(10):
            inst, x = gen_random(seed, vertices=9, sources=2, sinks=4, paths=10, regime="half")
            plan = route_general_rounds(inst, x)
            _, val = best_round(plan)
            assert val * len(plan.rounds) >= inst.total_demand
