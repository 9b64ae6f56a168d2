from __future__ import annotations

from fractions import Fraction

import pytest

from unsplittable.formats import emit_flow, emit_instance
from unsplittable.graph import Instance, is_transshipment, support_order, validate_instance
from unsplittable.instances import (
    REGIMES,
    gen_cost_of_confluence,
    gen_from_disjoint_paths,
    gen_nonintegral,
    gen_random,
    gen_tightness,
    random_corpus,
)

F = Fraction


def _ok(inst, x):
    assert validate_instance(inst) == []
    assert is_transshipment(inst, x, check_capacity=True)
    support_order(inst, x)


def test_random_is_byte_identical_per_seed():
    a = gen_random(42, vertices=12, sources=3, sinks=4, paths=10)
    b = gen_random(42, vertices=12, sources=3, sinks=4, paths=10)
    assert emit_instance(a[0]) + emit_flow(a[1], a[0]) == emit_instance(b[0]) + emit_flow(b[1], b[0])
    c = gen_random(43, vertices=12, sources=3, sinks=4, paths=10)
    assert emit_instance(a[0]) != emit_instance(c[0])


@pytest.mark.parametrize("regime", REGIMES)
def test_regimes(regime):
    factor = {"quarter": 4, "third": 3, "half": 2, "below": F(3, 2), "equal": 1}
    for seed in range(20):
        inst, x = gen_random(seed, vertices=9, sources=2, sinks=3, paths=8, extra_arcs=3, regime=regime)
        _ok(inst, x)
        if regime in factor:
            assert factor[regime] * inst.d_max <= inst.c_min
        if regime == "equal":
            assert inst.c_min == inst.d_max


def test_random_rejects_bad_sizes():
    with pytest.raises(ValueError):
        gen_random(0, vertices=3, sources=2, sinks=2)
    with pytest.raises(ValueError):
        gen_random(0, regime="nope")


def test_corpus():
    corpus = random_corpus(30, seed=1)
    assert len(corpus) == 30
    for inst, x in corpus:
        _ok(inst, x)
        assert len(inst.vertices) <= 30
    assert all(len(i.sources) == 1 for i, _ in random_corpus(10, seed=2, sources=1))


@pytest.mark.parametrize("q, k", [(3, 1), (4, 1), (5, 2), (6, 0)])
def test_tightness_family(q, k):
    inst, x = gen_tightness(q, k)
    _ok(inst, x)
    assert inst.d_max == 1 and inst.c_min == 1
    assert len(inst.sinks) == q and len(inst.sources) == q + k
    assert all(x[a.id] == F(1, q) for a in inst.arcs if a.head.startswith("t"))


def test_tightness_bad_args():
    with pytest.raises(ValueError):
        gen_tightness(3, 2)


@pytest.mark.parametrize("q", [2, 3, 4, 5])
def test_confluence_family(q):
    inst, x = gen_cost_of_confluence(q)
    _ok(inst, x)
    assert inst.c_min == 1 and inst.d_max == 1
    assert sorted(-inst.b(t) for t in inst.sinks) == [1 - F(1, q)] * q + [1]


def test_nonintegral_family():
    inst, x = gen_nonintegral()
    _ok(inst, x)
    assert inst.total_demand == 20
    assert all(a.capacity.denominator == 1 for a in inst.arcs)
    assert all(inst.b(v).denominator == 1 for v in inst.vertices)


def _base():
    return Instance.build(
        ["s1", "s2", "m", "t1", "t2"],
        [("a", "s1", "m", 1), ("b", "s2", "m", 1), ("c", "m", "t1", 1), ("d", "m", "t2", 1)],
    )


def test_reduction_shape():
    inst = gen_from_disjoint_paths(_base(), [("s1", "t1"), ("s2", "t2")])
    assert validate_instance(inst) == []
    assert inst.b("s1") == 2 and inst.b("t2") == -2
    assert {"r1_2", "r2_1"} <= set(inst.arc)
    assert all(a.capacity == 1 for a in inst.arcs)


def test_reduction_rejects_shared_terminals():
    with pytest.raises(ValueError):
        gen_from_disjoint_paths(_base(), [("s1", "t1"), ("s1", "t2")])
    with pytest.raises(ValueError):
        gen_from_disjoint_paths(_base(), [("s1", "t1")])
    with pytest.raises(ValueError):
        gen_from_disjoint_paths(_base(), [("s1", "t1"), ("s2", "zz")])
