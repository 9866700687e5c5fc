"""Control graphs: directed multigraphs with an initial node and terminal set."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .errors import UnknownLabel


@dataclass(frozen=True)
class Arc:
    id: str
    dom: str
    codom: str


@dataclass(frozen=True)
class Violation:
    """One failed graph/model condition.

    ``condition`` is a short tag such as ``"initial-terminal"``; ``subject`` is
    the offending node, arc or op.
    """

    condition: str
    subject: str
    message: str

    def __str__(self):
        return f"[{self.condition}] {self.subject}: {self.message}"


@dataclass(frozen=True)
class ControlGraph:
    """``(nodes, arcs, dom, codom, initial, terminals)``.

    Nodes keep their declaration order; arcs keep theirs, which is the
    canonical outcome order at each node. Construction does not validate; call
    :func:`validate`.
    """

    nodes: tuple[str, ...]
    arcs: tuple[Arc, ...]
    initial: str
    terminals: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "arcs", tuple(a if isinstance(a, Arc) else Arc(*a) for a in self.arcs))
        object.__setattr__(self, "terminals", frozenset(self.terminals))
        object.__setattr__(self, "_arc_index", {a.id: a for a in self.arcs})
        out: dict[str, list[str]] = {n: [] for n in self.nodes}
        for a in self.arcs:
            out.setdefault(a.dom, []).append(a.id)
        object.__setattr__(self, "_out", {n: tuple(v) for n, v in out.items()})

    def arc(self, arc_id: str) -> Arc:
        try:
            return self._arc_index[arc_id]
        except KeyError:
            raise UnknownLabel(f"unknown arc {arc_id!r}") from None

    def is_terminal(self, node: str) -> bool:
        return node in self.terminals


def out_arcs(g: ControlGraph, n: str) -> tuple[str, ...]:
    """Arc ids leaving ``n`` in declaration order."""
    if n not in g.nodes:
        raise UnknownLabel(f"unknown node {n!r}")
    return g._out.get(n, ())


def reachable(g: ControlGraph) -> set[str]:
    seen = {g.initial} if g.initial in g.nodes else set()
    queue = deque(seen)
    while queue:
        n = queue.popleft()
        for a in g._out.get(n, ()):
            c = g.arc(a).codom
            if c not in seen and c in g.nodes:
                seen.add(c)
                queue.append(c)
    return seen


def coreachable(g: ControlGraph) -> set[str]:
    into: dict[str, list[str]] = {}
    for a in g.arcs:
        into.setdefault(a.codom, []).append(a.dom)
    seen = {t for t in g.terminals if t in g.nodes}
    queue = deque(seen)
    while queue:
        n = queue.popleft()
        for d in into.get(n, ()):
            if d not in seen and d in g.nodes:
                seen.add(d)
                queue.append(d)
    return seen


def validate(g: ControlGraph) -> list[Violation]:
    """All violated control-graph conditions; empty when the graph is valid."""
    v: list[Violation] = []
    node_set = set(g.nodes)
    if len(node_set) != len(g.nodes):
        dups = sorted({n for n in g.nodes if g.nodes.count(n) > 1})
        v.append(Violation("duplicate-node", ",".join(dups), "node declared more than once"))
    seen_arcs: set[str] = set()
    for a in g.arcs:
        if a.id in seen_arcs:
            v.append(Violation("duplicate-arc", a.id, "arc id declared more than once"))
        seen_arcs.add(a.id)
        for end, name in ((a.dom, "dom"), (a.codom, "codom")):
            if end not in node_set:
                v.append(Violation("unknown-node", a.id, f"{name} {end!r} is not a declared node"))
    if g.initial not in node_set:
        v.append(Violation("unknown-node", g.initial, "initial node is not declared"))
    for t in sorted(g.terminals - node_set):
        v.append(Violation("unknown-node", t, "terminal node is not declared"))
    if not g.terminals:
        v.append(Violation("no-terminal", "-", "graph has no terminal node"))
    # (i) initial node is not terminal
    if g.initial in g.terminals:
        v.append(Violation("initial-terminal", g.initial, "initial node must not be terminal"))
    # (ii) no arc leaves a terminal node
    for a in g.arcs:
        if a.dom in g.terminals:
            v.append(Violation("terminal-out-arc", a.id, f"arc leaves terminal node {a.dom!r}"))
    # (iii) every node lies on a walk from the initial node to a terminal
    fwd, bwd = reachable(g), coreachable(g)
    for n in g.nodes:
        if n not in fwd:
            v.append(Violation("not-on-walk", n, "node is unreachable from the initial node"))
        elif n not in bwd:
            v.append(Violation("not-on-walk", n, "no walk from node reaches a terminal"))
    return v


def make_graph(
    nodes: Iterable[str],
    arcs: Iterable[tuple[str, str, str] | Arc],
    initial: str,
    terminals: Iterable[str],
) -> ControlGraph:
    return ControlGraph(tuple(nodes), tuple(arcs), initial, frozenset(terminals))
