"""Line-oriented text formats for instances, flows, solutions and round plans.

Instance::

    v <id> <balance>
    a <id> <tail> <head> <capacity>

Flow::

    f <arc-id> <value>

Solution (one line per path, stats as trailing comments)::

    p <source> <sink> <value> <arc-id> ...

Plan: ``round <i>`` headers, each followed by solution-format path lines.

Numbers are integers, decimals or ``p/q``; everything is read exactly.
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from .graph import Arc, Instance, PathFlow, UnsplittableSolution, ZERO


class FormatError(ValueError):
    pass


def fmt(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_number(tok: str, lineno: int = 0) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise FormatError(f"line {lineno}: bad number {tok!r}") from None


def _records(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _read(src) -> str:
    if isinstance(src, Path):
        return src.read_text()
    if isinstance(src, str) and "\n" not in src and Path(src).is_file():
        return Path(src).read_text()
    return src


def parse_instance(src) -> Instance:
    vertices, balance, arcs = [], {}, []
    for lineno, tok in _records(_read(src)):
        if tok[0] == "v":
            if len(tok) != 3:
                raise FormatError(f"line {lineno}: expected 'v <id> <balance>'")
            vertices.append(tok[1])
            balance[tok[1]] = parse_number(tok[2], lineno)
        elif tok[0] == "a":
            if len(tok) != 5:
                raise FormatError(f"line {lineno}: expected 'a <id> <tail> <head> <capacity>'")
            arcs.append(Arc(tok[1], tok[2], tok[3], parse_number(tok[4], lineno)))
        elif tok[0] in ("f", "p", "round"):
            continue
        else:
            raise FormatError(f"line {lineno}: unknown record {tok[0]!r}")
    known = set(vertices)
    for a in arcs:
        for v in (a.tail, a.head):
            if v not in known:
                raise FormatError(f"arc {a.id} references undeclared vertex {v}")
    return Instance(tuple(vertices), tuple(arcs), balance)


def emit_instance(inst: Instance, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines += [f"# {c}" for c in comment.splitlines()]
    lines += [f"v {v} {fmt(inst.b(v))}" for v in inst.vertices]
    lines += [f"a {a.id} {a.tail} {a.head} {fmt(a.capacity)}" for a in inst.arcs]
    return "\n".join(lines) + "\n"


def parse_flow(src) -> dict:
    flow = {}
    for lineno, tok in _records(_read(src)):
        if tok[0] != "f":
            continue
        if len(tok) != 3:
            raise FormatError(f"line {lineno}: expected 'f <arc-id> <value>'")
        flow[tok[1]] = parse_number(tok[2], lineno)
    return flow


def emit_flow(flow, inst: Instance | None = None) -> str:
    keys = [a.id for a in inst.arcs if a.id in flow] if inst is not None else list(flow)
    return "".join(f"f {a} {fmt(flow[a])}\n" for a in keys)


def _parse_path(tok, lineno) -> PathFlow:
    if len(tok) < 4:
        raise FormatError(f"line {lineno}: expected 'p <source> <sink> <value> <arc-id> ...'")
    return PathFlow(tok[1], tok[2], parse_number(tok[3], lineno), tuple(tok[4:]))


def parse_solution(src) -> UnsplittableSolution:
    return UnsplittableSolution(
        [_parse_path(tok, n) for n, tok in _records(_read(src)) if tok[0] == "p"]
    )


def path_line(p: PathFlow) -> str:
    return " ".join(["p", str(p.source), str(p.sink), fmt(p.value), *map(str, p.arcs)])


def emit_solution(sol: UnsplittableSolution, stats: dict | None = None) -> str:
    lines = [path_line(p) for p in sol.paths]
    if stats:
        lines.append("# stats")
        lines += [f"# {k} = {fmt(v) if isinstance(v, Fraction) else v}" for k, v in stats.items()]
    return "\n".join(lines) + "\n"


def parse_plan(src) -> list:
    """Return a list of ``(sinks, UnsplittableSolution)`` pairs."""
    rounds = []
    for lineno, tok in _records(_read(src)):
        if tok[0] == "round":
            rounds.append([])
        elif tok[0] == "p":
            if not rounds:
                raise FormatError(f"line {lineno}: path before first 'round' header")
            rounds[-1].append(_parse_path(tok, lineno))
    return [(sorted({p.sink for p in r}), UnsplittableSolution(r)) for r in rounds]


def is_plan(text: str) -> bool:
    return any(tok[0] == "round" for _, tok in _records(text))


def emit_plan(rounds, stats: dict | None = None) -> str:
    """``rounds`` is a sequence of objects with a ``solution`` attribute, or of solutions."""
    lines = []
    for i, r in enumerate(rounds):
        sol = getattr(r, "solution", r)
        lines.append(f"round {i}")
        lines += [path_line(p) for p in sol.paths]
    if stats:
        lines.append("# stats")
        lines += [f"# {k} = {fmt(v) if isinstance(v, Fraction) else v}" for k, v in stats.items()]
    return "\n".join(lines) + "\n"


def to_dot(inst: Instance, flow=None) -> str:
    flow = flow or {}
    out = ["digraph G {"]
    for v in inst.vertices:
        out.append(f'  "{v}" [label="{v}\\n{fmt(inst.b(v))}"];')
    for a in inst.arcs:
        label = f"{a.id} c={fmt(a.capacity)}"
        if flow.get(a.id, ZERO):
            label += f" f={fmt(flow[a.id])}"
        out.append(f'  "{a.tail}" -> "{a.head}" [label="{label}"];')
    out.append("}")
    return "\n".join(out) + "\n"
