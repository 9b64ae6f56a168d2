"""Command-line front end.

Exit codes: 0 success or all checks pass, 1 a check failed, 2 usage or parse
error, 3 infeasible, 4 instance too large for the exhaustive oracle.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import formats, instances
from .formats import FormatError, fmt
from .fractional import Infeasible, solve_fractional
from .graph import GraphError, decompose, validate_instance
from .rounds import ROUTERS, PreconditionError, best_round, verify_round_plan
from .solver import VARIANTS, AlgorithmInvariantError
from .verify import ScaleError, brute_force_feasible, min_violation_oracle, render, verify_solution

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_SCALE = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def _write(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _kv(stats: dict, style: str) -> str:
    def val(v):
        return fmt(v) if isinstance(v, Fraction) else str(v)

    if style == "kv":
        return "".join(f"{k}={val(v)}\n" for k, v in stats.items())
    return "".join(f"{k:<16} {val(v)}\n" for k, v in stats.items())


def _load_instance(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    inst = formats.parse_instance(text)
    problems = validate_instance(inst)
    if problems:
        raise UsageError("invalid instance: " + "; ".join(problems))
    return inst, text


def _load_flow(inst, inst_text, flow_path, compute=True):
    """Flow from ``--flow``, else ``f`` lines in the instance file, else max-flow."""
    if flow_path:
        try:
            flow = formats.parse_flow(Path(flow_path).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read {flow_path}: {exc.strerror}") from None
    else:
        flow = formats.parse_flow(inst_text)
    unknown = [a for a in flow if a not in inst.arc]
    if unknown:
        raise UsageError(f"flow on unknown arc {unknown[0]}")
    if not flow and compute:
        flow = solve_fractional(inst)
    return flow


# ------------------------------------------------------------------ commands
def cmd_gen(args):
    fam = args.family
    x = None
    if fam == "tightness":
        inst, x = instances.gen_tightness(args.q, args.k)
        note = f"tightness family q={args.q} k={args.k}"
    elif fam == "confluence":
        inst, x = instances.gen_cost_of_confluence(args.q)
        note = f"cost of confluence q={args.q}"
    elif fam == "nonintegral":
        inst, x = instances.gen_nonintegral()
        note = "integral data, only non-integral unsplittable solutions"
    elif fam == "reduction":
        if not args.base or not args.pairs:
            raise UsageError("reduction needs --base and --pairs")
        base, _ = _load_instance(args.base)
        pairs = [tuple(p.split(":")) for p in args.pairs.split(",")]
        if any(len(p) != 2 for p in pairs):
            raise UsageError("--pairs expects s1:t1,s2:t2,...")
        inst = instances.gen_from_disjoint_paths(base, pairs)
        note = "arc-disjoint paths reduction " + args.pairs
    else:
        inst, x = instances.gen_random(
            args.seed, vertices=args.vertices, sources=args.sources, sinks=args.sinks,
            paths=args.paths, extra_arcs=args.extra_arcs, regime=args.regime,
        )
        note = f"random seed={args.seed} regime={args.regime}"
    text = formats.emit_instance(inst, note)
    if x is not None:
        text += formats.emit_flow(x, inst)
    _write(text, args.output)
    return EXIT_OK


def cmd_fractional(args):
    inst, _ = _load_instance(args.instance)
    try:
        flow = solve_fractional(inst)
    except Infeasible as exc:
        side = " ".join(str(v) for v in sorted(exc.cut.side, key=inst.index.get))
        print(f"infeasible: {exc}", file=sys.stderr)
        print(f"cut side: {{{side}}} capacity {fmt(exc.cut.capacity)} < demand {fmt(exc.cut.demand)}",
              file=sys.stderr)
        return EXIT_INFEASIBLE
    _write(formats.emit_flow(flow, inst), args.output)
    return EXIT_OK


def cmd_solve(args):
    inst, text = _load_instance(args.instance)
    x = _load_flow(inst, text, args.flow)
    result = VARIANTS[args.variant](inst, x, debug=args.debug)
    stats = result.stats
    out = formats.emit_solution(result.solution, stats)
    if args.output:
        _write(out, args.output)
        sys.stdout.write(_kv(stats, args.format))
    else:
        sys.stdout.write(out)
    if args.plot:
        from .plotting import plot_arc_loads

        plot_arc_loads(inst, x, result.solution.flow(), result.bound, args.plot,
                       title=f"{args.variant} variant")
    if args.dot:
        Path(args.dot).write_text(formats.to_dot(inst, result.solution.flow()))
    return EXIT_OK


def cmd_rounds(args):
    inst, text = _load_instance(args.instance)
    x = _load_flow(inst, text, args.flow)
    kwargs = {"n": args.n} if args.scheme == "general" and args.n else {}
    try:
        plan = ROUTERS[args.scheme](inst, x, **kwargs)
    except PreconditionError as exc:
        raise UsageError(str(exc)) from None
    report = verify_round_plan(inst, plan)
    idx, val = best_round(plan) if plan.rounds else (None, Fraction(0))
    stats = dict(plan.stats, best_round=idx, best_round_demand=val, verified=report.passed)
    out = formats.emit_plan(plan.rounds, stats)
    if args.output:
        _write(out, args.output)
        sys.stdout.write(_kv(stats, args.format))
    else:
        sys.stdout.write(out)
    if args.plot:
        from .plotting import plot_round_loads

        plot_round_loads(inst, [(r.sinks, r.solution) for r in plan.rounds], args.plot,
                         title=f"{args.scheme} scheme")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_verify(args):
    inst, text = _load_instance(args.instance)
    try:
        sol_text = Path(args.solution).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {args.solution}: {exc.strerror}") from None
    if formats.is_plan(sol_text):
        report = verify_round_plan(inst, formats.parse_plan(sol_text))
    else:
        sol = formats.parse_solution(sol_text)
        x = _load_flow(inst, text, args.flow, compute=False) or None
        report = verify_solution(inst, sol, x, args.direction, args.bound, args.capacity)
    sys.stdout.write(render(report, args.format))
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_oracle(args):
    inst, text = _load_instance(args.instance)
    if args.min_violation:
        x = _load_flow(inst, text, args.flow)
        res = min_violation_oracle(inst, x, confluent=args.confluent)
        if not res.feasible:
            print("infeasible: no unsplittable transshipment", file=sys.stderr)
            return EXIT_INFEASIBLE
        stats = {"min_violation": res.value, "structures": res.structures, "nodes": res.nodes}
        sys.stdout.write(formats.emit_solution(res.solution, stats))
        return EXIT_OK
    res = brute_force_feasible(inst, integral_only=args.integral, confluent=args.confluent)
    stats = {"feasible": res.feasible, "structures": res.structures, "nodes": res.nodes}
    if not res.feasible:
        sys.stdout.write(_kv(stats, args.format))
        print("infeasible", file=sys.stderr)
        return EXIT_INFEASIBLE
    sys.stdout.write(formats.emit_solution(res.solution, stats))
    return EXIT_OK


def cmd_decompose(args):
    inst, text = _load_instance(args.instance)
    x = _load_flow(inst, text, args.flow)
    paths, cycles = decompose(inst, x)
    lines = [formats.path_line(p) for p in paths]
    lines += [f"# cycle {fmt(c.value)} " + " ".join(map(str, c.arcs)) for c in cycles]
    _write("\n".join(lines) + "\n", args.output)
    return EXIT_OK


# ------------------------------------------------------------------ parser
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="unsplittable", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, flow=True, out=True):
        sp.add_argument("--format", choices=("text", "kv"), default="text")
        if flow:
            sp.add_argument("--flow", help="fractional flow file (default: f lines of the instance)")
        if out:
            sp.add_argument("-o", "--output")

    g = sub.add_parser("gen", help="generate an instance (plus its fractional flow)")
    g.add_argument("--family", required=True,
                   choices=("tightness", "confluence", "nonintegral", "reduction", "random"))
    g.add_argument("--q", type=int, default=4)
    g.add_argument("--k", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--vertices", type=int, default=8)
    g.add_argument("--sources", type=int, default=2)
    g.add_argument("--sinks", type=int, default=3)
    g.add_argument("--paths", type=int, default=6)
    g.add_argument("--extra-arcs", type=int, default=2)
    g.add_argument("--regime", choices=instances.REGIMES, default="free")
    g.add_argument("--base", help="base digraph for --family reduction")
    g.add_argument("--pairs", help="terminal pairs s1:t1,s2:t2 for --family reduction")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    f = sub.add_parser("fractional", help="feasible fractional b-transshipment by max-flow")
    f.add_argument("instance")
    common(f, flow=False)
    f.set_defaults(func=cmd_fractional)

    s = sub.add_parser("solve", help="unsplittable transshipment from a fractional one")
    s.add_argument("instance")
    s.add_argument("--variant", choices=("upper", "lower", "reversed", "auto"), default="upper")
    s.add_argument("--debug", action="store_true", help="check invariants at every iteration")
    s.add_argument("--plot", help="write an arc-load figure to this file")
    s.add_argument("--dot", help="write a DOT rendering of instance and solution")
    common(s)
    s.set_defaults(func=cmd_solve)

    r = sub.add_parser("rounds", help="route all sinks in capacity-feasible rounds")
    r.add_argument("instance")
    r.add_argument("--scheme", choices=tuple(ROUTERS), default="general")
    r.add_argument("--n", type=int, help="copy parameter for --scheme general")
    r.add_argument("--plot", help="write a per-round load figure to this file")
    common(r)
    r.set_defaults(func=cmd_rounds)

    v = sub.add_parser("verify", help="check a solution or a round plan")
    v.add_argument("instance")
    v.add_argument("solution")
    v.add_argument("--direction", choices=("upper", "lower"), default="upper")
    v.add_argument("--bound", type=Fraction, help="bound in place of d_max")
    v.add_argument("--capacity", action="store_true", help="also require flow <= capacity")
    common(v, out=False)
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oracle", help="exhaustive feasibility or minimum-violation search")
    o.add_argument("instance")
    o.add_argument("--integral", action="store_true")
    o.add_argument("--confluent", action="store_true")
    o.add_argument("--min-violation", action="store_true")
    common(o, out=False)
    o.set_defaults(func=cmd_oracle)

    d = sub.add_parser("decompose", help="path and cycle decomposition of a flow")
    d.add_argument("instance")
    common(d)
    d.set_defaults(func=cmd_decompose)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (UsageError, FormatError, GraphError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ScaleError as exc:
        print(f"scale guard: {exc}", file=sys.stderr)
        return EXIT_SCALE
    except AlgorithmInvariantError as exc:
        print(f"internal invariant failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
