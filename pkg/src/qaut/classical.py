"""Abstract state machines with stochastic behaviour.

A machine pairs a control graph with a finite snapshot set, a snapshot map
``g_a`` per arc and a distribution ``Pr(a | S, n)`` over ``Out(n)`` for every
non-terminal node ``n`` and snapshot ``S``. It doubles as an oracle for the
quantum engine through :func:`embed_as_quantum`.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .automaton import AbstractQuantumAutomaton
from .errors import QautError
from .graph import Arc, ControlGraph, Violation, out_arcs, validate
from .linalg import DEFAULT_TOL
from .quantum import KrausFamily, OutcomeSet, QuantumOperation

CONVERGED = "converged"
EXHAUSTED = "step-limit-exhausted"


@dataclass(frozen=True, eq=False)
class StochasticASM:
    graph: ControlGraph
    snapshots: tuple[str, ...]
    transforms: Mapping[str, Mapping[str, str]]
    dist: Mapping[tuple[str, str], Mapping[str, float]]
    name: str = "machine"
    initial_snapshot: str | None = None

    def prob(self, arc: str, snapshot: str, node: str) -> float:
        return float(self.dist.get((node, snapshot), {}).get(arc, 0.0))

    def apply(self, arc: str, snapshot: str) -> str:
        return self.transforms[arc][snapshot]


class InvalidMachine(QautError, ValueError):
    def __init__(self, violations: list[Violation]):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = violations


def validate_asm(m: StochasticASM, tol: float = DEFAULT_TOL) -> list[Violation]:
    v = list(validate(m.graph))
    snaps = set(m.snapshots)
    if not m.snapshots:
        v.append(Violation("snapshots", m.name, "snapshot set is empty"))
    if len(snaps) != len(m.snapshots):
        v.append(Violation("snapshots", m.name, "duplicate snapshot labels"))
    arc_ids = {a.id for a in m.graph.arcs}
    for a in m.graph.arcs:
        table = m.transforms.get(a.id)
        if table is None:
            v.append(Violation("transform", a.id, "arc has no snapshot map"))
            continue
        for s in m.snapshots:
            if s not in table:
                v.append(Violation("transform", a.id, f"snapshot map is undefined on {s!r}"))
            elif table[s] not in snaps:
                v.append(Violation("transform", a.id, f"maps {s!r} to unknown snapshot {table[s]!r}"))
    for arc in m.transforms:
        if arc not in arc_ids:
            v.append(Violation("transform", arc, "snapshot map for an undeclared arc"))
    for (node, s), row in m.dist.items():
        if node not in m.graph.nodes or s not in snaps:
            v.append(Violation("distribution", f"{node},{s}", "distribution for unknown node or snapshot"))
            continue
        legal = set(out_arcs(m.graph, node))
        for arc, p in row.items():
            if not (0.0 <= p <= 1.0):
                v.append(Violation("distribution", f"{node},{s}", f"Pr({arc}) = {p} outside [0, 1]"))
            if arc not in legal and p != 0.0:
                v.append(Violation("distribution", f"{node},{s}", f"Pr({arc}) = {p} but {arc} is not in Out({node})"))
    for node in m.graph.nodes:
        if m.graph.is_terminal(node):
            continue
        for s in m.snapshots:
            total = math.fsum(m.prob(a, s, node) for a in out_arcs(m.graph, node))
            if abs(total - 1.0) > tol:
                v.append(Violation("distribution", f"{node},{s}", f"probabilities over Out({node}) sum to {total:.12g}"))
    return v


def check_asm(m: StochasticASM, tol: float = DEFAULT_TOL) -> StochasticASM:
    violations = validate_asm(m, tol)
    if violations:
        raise InvalidMachine(violations)
    return m


@dataclass(frozen=True)
class ClassicalStep:
    node: str
    snapshot: str
    arc: str | None


@dataclass(frozen=True)
class ClassicalRunTrace:
    steps: tuple[ClassicalStep, ...]
    status: str

    @property
    def final(self) -> tuple[str, str]:
        last = self.steps[-1]
        return last.node, last.snapshot


def sample_classical_run(m: StochasticASM, s0: str, seed: int, max_steps: int = 64) -> ClassicalRunTrace:
    """Seeded run: inverse-CDF over ``Out(n)`` in declaration order."""
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    if s0 not in m.snapshots:
        raise QautError(f"unknown snapshot {s0!r}")
    rng = random.Random(seed)
    node, snap = m.graph.initial, s0
    steps = []
    for _ in range(max_steps):
        arcs = out_arcs(m.graph, node)
        u = rng.random()
        acc = 0.0
        chosen = None
        for a in arcs:
            p = m.prob(a, snap, node)
            acc += p
            if p > 0 and u < acc:
                chosen = a
                break
        if chosen is None:  # rounding left u above the cumulative sum
            chosen = [a for a in arcs if m.prob(a, snap, node) > 0][-1]
        steps.append(ClassicalStep(node, snap, chosen))
        node, snap = m.graph.arc(chosen).codom, m.apply(chosen, snap)
        if m.graph.is_terminal(node):
            steps.append(ClassicalStep(node, snap, None))
            return ClassicalRunTrace(tuple(steps), CONVERGED)
    steps.append(ClassicalStep(node, snap, None))
    return ClassicalRunTrace(tuple(steps), EXHAUSTED)


@dataclass(frozen=True)
class ClassicalDistribution:
    masses: dict[tuple[str, str], float]
    residual: float


def enumerate_classical(
    m: StochasticASM, s0: str, max_steps: int = 64, prune_eps: float = 0.0
) -> ClassicalDistribution:
    """Exact terminal distribution after at most ``max_steps`` transitions.

    Propagates the configuration distribution step by step, merging equal
    ``(node, snapshot)`` pairs. Configurations with mass at most ``prune_eps``
    and non-terminal mass left after ``max_steps`` go to ``residual``.
    """
    if s0 not in m.snapshots:
        raise QautError(f"unknown snapshot {s0!r}")
    frontier: dict[tuple[str, str], float] = {(m.graph.initial, s0): 1.0}
    terminal: dict[tuple[str, str], list[float]] = {}
    residual: list[float] = []
    for _ in range(max_steps):
        nxt: dict[tuple[str, str], list[float]] = {}
        for (node, snap), mass in frontier.items():
            if mass <= prune_eps:
                residual.append(mass)
                continue
            for a in out_arcs(m.graph, node):
                p = m.prob(a, snap, node)
                if p <= 0.0:
                    continue
                key = (m.graph.arc(a).codom, m.apply(a, snap))
                bucket = terminal if m.graph.is_terminal(key[0]) else nxt
                bucket.setdefault(key, []).append(mass * p)
        frontier = {k: math.fsum(v) for k, v in nxt.items()}
        if not frontier:
            break
    residual.extend(frontier.values())
    return ClassicalDistribution({k: math.fsum(v) for k, v in terminal.items()}, math.fsum(residual))


def embed_as_quantum(m: StochasticASM, tol: float = DEFAULT_TOL) -> AbstractQuantumAutomaton:
    """Quantum automaton over ``H_d`` with basis ``|S>`` simulating ``m``.

    The block for arc ``a`` at node ``n`` is ``sum_S sqrt(Pr(a|S,n)) |g_a(S)><S|``.
    When ``g_a`` merges two snapshots that both carry probability, that sum
    is not complete, so the arc is split into parallel arcs ``a@S`` (same
    endpoints), one per snapshot. A single-snapshot machine is padded to
    dimension 2 with an inert basis state.
    """
    check_asm(m, tol)
    index = {s: i for i, s in enumerate(m.snapshots)}
    d = len(m.snapshots)
    dim = max(d, 2)
    arcs: list[Arc] = []
    ops: dict[str, QuantumOperation] = {}
    for node in m.graph.nodes:
        if m.graph.is_terminal(node):
            continue
        blocks: dict[str, np.ndarray] = {}
        for a in out_arcs(m.graph, node):
            arc = m.graph.arc(a)
            support = [s for s in m.snapshots if m.prob(a, s, node) > 0]
            images = [m.apply(a, s) for s in support]
            if len(set(images)) == len(images):
                k = np.zeros((dim, dim), dtype=np.complex128)
                for s in support:
                    k[index[m.apply(a, s)], index[s]] = math.sqrt(m.prob(a, s, node))
                blocks[a] = k
                arcs.append(arc)
            else:
                for s in support:
                    k = np.zeros((dim, dim), dtype=np.complex128)
                    k[index[m.apply(a, s)], index[s]] = math.sqrt(m.prob(a, s, node))
                    label = f"{a}@{s}"
                    blocks[label] = k
                    arcs.append(Arc(label, arc.dom, arc.codom))
        if d < dim:
            first = next(iter(blocks))
            blocks[first] = blocks[first].copy()
            blocks[first][d, d] = 1.0
        ops[node] = QuantumOperation(KrausFamily(dim, OutcomeSet(tuple(blocks)), blocks, tol))
    graph = ControlGraph(m.graph.nodes, tuple(arcs), m.graph.initial, m.graph.terminals)
    return AbstractQuantumAutomaton(dim, graph, ops, m.name)
