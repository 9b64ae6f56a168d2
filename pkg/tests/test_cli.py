from __future__ import annotations

from pathlib import Path

import pytest

from unsplittable.cli import main
from unsplittable.formats import parse_instance, parse_plan, parse_solution

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def rand(tmp_path):
    path = tmp_path / "r.txt"
    assert main(["gen", "--family", "random", "--seed", "5", "--regime", "quarter", "--vertices", "9",
                 "--sinks", "3", "--paths", "8", "-o", str(path)]) == 0
    return path


def test_gen_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for p in (a, b):
        assert run(capsys, "gen", "--family", "tightness", "--q", "4", "--k", "1", "-o", p)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(parse_instance(a.read_text()).sinks) == 4


def test_solve_and_verify_round_trip(rand, tmp_path, capsys):
    sol, fig, dot = tmp_path / "s.txt", tmp_path / "s.png", tmp_path / "s.dot"
    code, out, _ = run(capsys, "solve", rand, "--debug", "-o", sol, "--plot", fig, "--dot", dot, "--format", "kv")
    assert code == 0 and "variant=upper" in out
    assert parse_solution(sol.read_text()).paths
    assert fig.stat().st_size > 0 and dot.read_text().startswith("digraph")
    code, out, _ = run(capsys, "verify", rand, sol, "--format", "kv")
    assert code == 0 and "check.bound_upper=pass" in out


def test_verify_failure_exit_1(rand, tmp_path, capsys):
    sol = tmp_path / "s.txt"
    run(capsys, "solve", rand, "-o", sol)
    lines = sol.read_text().splitlines()
    sol.write_text("\n".join(lines[1:]) + "\n")
    code, out, _ = run(capsys, "verify", rand, sol)
    assert code == 1 and "fail" in out


def test_lower_variant(rand, capsys):
    code, out, _ = run(capsys, "solve", rand, "--variant", "lower")
    assert code == 0 and "# variant = lower" in out


def test_rounds_with_plot(rand, tmp_path, capsys):
    plan, fig = tmp_path / "p.txt", tmp_path / "p.png"
    code, out, _ = run(capsys, "rounds", rand, "--scheme", "four", "-o", plan, "--plot", fig, "--format", "kv")
    assert code == 0 and "verified=True" in out
    assert fig.stat().st_size > 0
    assert len(parse_plan(plan.read_text())) <= 4
    code, out, _ = run(capsys, "verify", rand, plan)
    assert code == 0 and "supply_total" in out


def test_rounds_precondition_exit_2(tmp_path, capsys):
    inst = tmp_path / "b.txt"
    run(capsys, "gen", "--family", "nonintegral", "-o", inst)
    code, _, err = run(capsys, "rounds", inst)
    assert code == 2 and "balance condition" in err


def test_oracle_exit_codes(tmp_path, capsys):
    inst = tmp_path / "b.txt"
    run(capsys, "gen", "--family", "nonintegral", "-o", inst)
    assert run(capsys, "oracle", inst)[0] == 0
    code, out, _ = run(capsys, "oracle", inst, "--integral", "--format", "kv")
    assert code == 3 and "feasible=False" in out


def test_min_violation(tmp_path, capsys):
    inst = tmp_path / "t.txt"
    run(capsys, "gen", "--family", "tightness", "--q", "3", "--k", "1", "-o", inst)
    code, out, _ = run(capsys, "oracle", inst, "--min-violation")
    assert code == 0 and "# min_violation = 1/3" in out


def test_scale_guard_exit_4(tmp_path, capsys):
    lines = [f"v u{i} 0" if 0 < i < 10 else f"v u{i} {1 if i == 0 else -1}" for i in range(11)]
    for i in range(10):
        lines += [f"a h{i} u{i} u{i + 1} 1", f"a l{i} u{i} u{i + 1} 1"]
    inst = tmp_path / "ladder.txt"
    inst.write_text("\n".join(lines) + "\n")
    assert run(capsys, "oracle", inst)[0] == 4


def test_fractional_infeasible_exit_3(tmp_path, capsys):
    inst = tmp_path / "i.txt"
    inst.write_text("v s 2\nv t -2\na e s t 1\n")
    code, _, err = run(capsys, "fractional", inst)
    assert code == 3 and "cut side: {s}" in err
    assert run(capsys, "solve", inst)[0] == 3


def test_usage_errors_exit_2(tmp_path, capsys):
    assert run(capsys, "solve", tmp_path / "missing.txt")[0] == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("v a 1\nv b -2\n")
    code, _, err = run(capsys, "solve", bad)
    assert code == 2 and "balance" in err
    bad.write_text("q nonsense\n")
    assert run(capsys, "solve", bad)[0] == 2
    assert run(capsys, "gen", "--family", "reduction")[0] == 2
    with pytest.raises(SystemExit) as info:
        main(["solve"])
    assert info.value.code == 2


def test_decompose_and_fractional(tmp_path, capsys):
    inst = tmp_path / "b.txt"
    run(capsys, "gen", "--family", "nonintegral", "-o", inst)
    code, out, _ = run(capsys, "decompose", inst)
    assert code == 0 and sorted(line.split()[3] for line in out.splitlines()) == ["13/2", "17/2", "3/2", "7/2"]
    code, out, _ = run(capsys, "fractional", inst)
    assert code == 0 and out.startswith("f ")


def test_reduction_gen(tmp_path, capsys):
    base = tmp_path / "base.txt"
    # the two pairs can share vertex m but not an arc
    base.write_text("v s1 0\nv s2 0\nv m 0\nv t1 0\nv t2 0\n"
                    "a a s1 m 1\na b s2 m 1\na c m t1 1\na d m t2 1\n")
    out = tmp_path / "red.txt"
    assert run(capsys, "gen", "--family", "reduction", "--base", base, "--pairs", "s1:t1,s2:t2", "-o", out)[0] == 0
    assert run(capsys, "oracle", out)[0] == 0
    # a single bottleneck arc m->n makes the pairs collide
    base.write_text("v s1 0\nv s2 0\nv m 0\nv n 0\nv t1 0\nv t2 0\n"
                    "a a s1 m 1\na b s2 m 1\na k m n 1\na c n t1 1\na d n t2 1\n")
    assert run(capsys, "gen", "--family", "reduction", "--base", base, "--pairs", "s1:t1,s2:t2", "-o", out)[0] == 0
    assert run(capsys, "oracle", out)[0] == 3


def test_fixture_plan(capsys):
    code, out, _ = run(capsys, "rounds", DATA / "six_rounds_full.txt", "--scheme", "six", "--format", "kv")
    assert code == 0 and "rounds = 6" in out
