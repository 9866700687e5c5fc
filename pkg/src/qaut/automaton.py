"""Abstract quantum automata and their runs.

A run starts at the initial node with a density operator. At each non-terminal
node the node's operation is measured; outcome ``a`` (an arc leaving the node)
occurs with probability ``tr(rho K(a)* K(a))``, the state is replaced by the
normalised effect and control moves to ``codom(a)``. Runs stop at terminal
nodes or after ``max_steps`` transitions.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import linalg
from .errors import DimensionMismatch, QautError, ResidualMass, UnknownLabel
from .graph import ControlGraph, Violation, out_arcs, validate
from .linalg import DEFAULT_TOL
from .quantum import (
    DEFAULT_PROB_FLOOR,
    DensityOperator,
    QuantumOperation,
    _clamp_probability,
    _effect,
    completeness_deviation,
    make_density,
)

CONVERGED = "converged"
EXHAUSTED = "step-limit-exhausted"


@dataclass(frozen=True, eq=False)
class AbstractQuantumAutomaton:
    dim: int
    graph: ControlGraph
    ops: Mapping[str, QuantumOperation]
    name: str = "automaton"
    initial_state: DensityOperator | None = None


class InvalidAutomaton(QautError, ValueError):
    def __init__(self, violations: list[Violation]):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = violations


def validate_automaton(a: AbstractQuantumAutomaton, tol: float = DEFAULT_TOL) -> list[Violation]:
    v = list(validate(a.graph))
    if a.dim < 2:
        v.append(Violation("dimension", a.name, f"state space dimension must exceed 1, got {a.dim}"))
    nodes = set(a.graph.nodes)
    for n in a.ops:
        if n not in nodes:
            v.append(Violation("op-unknown-node", n, "operation attached to an undeclared node"))
        elif a.graph.is_terminal(n):
            v.append(Violation("op-on-terminal", n, "terminal nodes carry no operation"))
    for n in a.graph.nodes:
        if a.graph.is_terminal(n):
            continue
        op = a.ops.get(n)
        if op is None:
            v.append(Violation("missing-op", n, "non-terminal node has no operation"))
            continue
        arcs = out_arcs(a.graph, n)
        if set(op.outcomes.labels) != set(arcs):
            v.append(Violation(
                "outcome-mismatch", n,
                f"operation outcomes {list(op.outcomes.labels)} differ from Out({n}) = {list(arcs)}",
            ))
        if op.dim != a.dim:
            v.append(Violation("op-dimension", n, f"operation acts on dimension {op.dim}, automaton has {a.dim}"))
            continue
        dev = completeness_deviation(op.kraus.blocks.values(), op.dim)
        if dev > tol:
            v.append(Violation("completeness", n, f"completeness violated at node {n} (max deviation {dev:.3e})"))
    return v


def check_automaton(a: AbstractQuantumAutomaton, tol: float = DEFAULT_TOL) -> AbstractQuantumAutomaton:
    violations = validate_automaton(a, tol)
    if violations:
        raise InvalidAutomaton(violations)
    return a


@dataclass(frozen=True, eq=False)
class Configuration:
    node: str
    state: DensityOperator


@dataclass(frozen=True)
class Branch:
    arc: str
    probability: float
    config: Configuration


def _distribution(a: AbstractQuantumAutomaton, c: Configuration, tol: float) -> list[tuple[str, float]]:
    if a.graph.is_terminal(c.node):
        raise QautError(f"node {c.node!r} is terminal; no step is possible")
    if c.state.dim != a.dim:
        raise DimensionMismatch(f"state has dimension {c.state.dim}, automaton has {a.dim}")
    op = a.ops[c.node]
    probs = [
        (arc, _clamp_probability(linalg.sandwich_trace(op.block(arc), c.state.matrix), tol))
        for arc in out_arcs(a.graph, c.node)
    ]
    total = math.fsum(p for _, p in probs)
    if abs(total - 1.0) > tol:
        raise QautError(f"outcome probabilities at node {c.node!r} sum to {total:.15g}")
    return probs


def outcome_probabilities(
    a: AbstractQuantumAutomaton, c: Configuration, tol: float = DEFAULT_TOL
) -> dict[str, float]:
    """``Pr(arc | node, rho)`` for every arc of ``Out(node)``, including zeros."""
    return dict(_distribution(a, c, tol))


def step(
    a: AbstractQuantumAutomaton,
    c: Configuration,
    prob_floor: float = DEFAULT_PROB_FLOOR,
    tol: float = DEFAULT_TOL,
) -> list[Branch]:
    """Successor configurations of ``c`` with probability above ``prob_floor``."""
    op = a.ops[c.node] if c.node in a.ops else None
    out = []
    for arc, p in _distribution(a, c, tol):
        if p <= prob_floor:
            continue
        state = _effect(op.block(arc), c.state, p, tol)
        out.append(Branch(arc, p, Configuration(a.graph.arc(arc).codom, state)))
    return out


@dataclass(frozen=True)
class TraceStep:
    config: Configuration
    arc: str | None
    probability: float | None


@dataclass(frozen=True)
class QuantumRunTrace:
    steps: tuple[TraceStep, ...]
    status: str

    @property
    def final(self) -> Configuration:
        return self.steps[-1].config

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED


def _pick(probs: list[tuple[str, float]], u: float, prob_floor: float) -> tuple[str, float]:
    live = [(arc, p) for arc, p in probs if p > prob_floor]
    target = u * math.fsum(p for _, p in live)
    acc = 0.0
    for arc, p in live:
        acc += p
        if target < acc:
            return arc, p
    return live[-1]


def sample_run(
    a: AbstractQuantumAutomaton,
    rho0: DensityOperator,
    seed: int,
    max_steps: int = 64,
    prob_floor: float = DEFAULT_PROB_FLOOR,
    tol: float = DEFAULT_TOL,
) -> QuantumRunTrace:
    """Sample one run with a ``random.Random(seed)`` stream, one draw per step."""
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    if rho0.dim != a.dim:
        raise DimensionMismatch(f"initial state has dimension {rho0.dim}, automaton has {a.dim}")
    rng = random.Random(seed)
    config = Configuration(a.graph.initial, rho0)
    steps: list[TraceStep] = []
    for _ in range(max_steps):
        probs = _distribution(a, config, tol)
        arc, p = _pick(probs, rng.random(), prob_floor)
        steps.append(TraceStep(config, arc, p))
        state = _effect(a.ops[config.node].block(arc), config.state, p, tol)
        config = Configuration(a.graph.arc(arc).codom, state)
        if a.graph.is_terminal(config.node):
            steps.append(TraceStep(config, None, None))
            return QuantumRunTrace(tuple(steps), CONVERGED)
    steps.append(TraceStep(config, None, None))
    return QuantumRunTrace(tuple(steps), EXHAUSTED)


TERMINAL = "terminal"
INTERNAL = "internal"
PRUNED = "pruned"
UNEXPANDED = "unexpanded"

DEFAULT_MERGE_TOL = 1e-12


@dataclass(eq=False)
class BranchNode:
    """A configuration reached after ``depth`` transitions with total ``mass``.

    When merging is on, several edges may lead to the same node.
    """

    config: Configuration
    mass: float
    depth: int
    kind: str = INTERNAL
    children: list["Edge"] = field(default_factory=list)
    parents: int = 0


@dataclass(eq=False)
class Edge:
    arc: str
    probability: float
    child: BranchNode


@dataclass(eq=False)
class BranchTree:
    root: BranchNode
    leaves: list[BranchNode]
    residual: float
    suppressed: float

    @property
    def terminal_leaves(self) -> list[BranchNode]:
        return [leaf for leaf in self.leaves if leaf.kind == TERMINAL]

    @property
    def terminal_mass(self) -> float:
        return math.fsum(leaf.mass for leaf in self.terminal_leaves)

    def terminal_distribution(self) -> dict[str, float]:
        out: dict[str, list[float]] = {}
        for leaf in self.terminal_leaves:
            out.setdefault(leaf.config.node, []).append(leaf.mass)
        return {k: math.fsum(v) for k, v in out.items()}

    def nodes(self) -> list[BranchNode]:
        """Every distinct node, root first, in level order."""
        seen, order, queue = set(), [], [self.root]
        while queue:
            n = queue.pop(0)
            if id(n) in seen:
                continue
            seen.add(id(n))
            order.append(n)
            queue.extend(e.child for e in n.children)
        return order


class _Bucket:
    """Configurations of one level at one control node, with their states stacked."""

    def __init__(self, dim: int):
        self.nodes: list[BranchNode] = []
        self.states = np.empty((4, dim, dim), dtype=np.complex128)

    def find(self, state: np.ndarray, tol: float) -> BranchNode | None:
        n = len(self.nodes)
        if n == 0:
            return None
        dev = np.abs(self.states[:n] - state).max(axis=(1, 2))
        i = int(np.argmin(dev))
        return self.nodes[i] if dev[i] <= tol else None

    def add(self, node: BranchNode, state: np.ndarray):
        n = len(self.nodes)
        if n == len(self.states):
            self.states = np.concatenate([self.states, np.empty_like(self.states)])
        self.states[n] = state
        self.nodes.append(node)


def enumerate_runs(
    a: AbstractQuantumAutomaton,
    rho0: DensityOperator,
    max_steps: int = 64,
    prune_eps: float = 0.0,
    prob_floor: float = DEFAULT_PROB_FLOOR,
    tol: float = DEFAULT_TOL,
    merge: bool = True,
    merge_tol: float = DEFAULT_MERGE_TOL,
) -> BranchTree:
    """Expand every run branch, one step level at a time.

    Non-terminal nodes whose mass is at most ``prune_eps`` and nodes still
    non-terminal after ``max_steps`` transitions become residual leaves.
    Outcomes at or below ``prob_floor`` are impossible; their mass is reported
    as ``suppressed``. With ``merge`` on, configurations reached after the same
    number of steps at the same node with states equal within ``merge_tol``
    are combined, since their futures are identical.
    """
    if rho0.dim != a.dim:
        raise DimensionMismatch(f"initial state has dimension {rho0.dim}, automaton has {a.dim}")
    root = BranchNode(Configuration(a.graph.initial, rho0), 1.0, 0)
    leaves: list[BranchNode] = []
    residual: list[float] = []
    suppressed: list[float] = []
    if a.graph.is_terminal(root.config.node):
        root.kind = TERMINAL
        return BranchTree(root, [root], 0.0, 0.0)
    frontier = [root]
    depth = 0
    while frontier and depth < max_steps:
        level: list[BranchNode] = []
        by_node: dict[str, _Bucket] = {}
        for node in frontier:
            if node.depth > 0 and node.mass <= prune_eps:
                node.kind = PRUNED
                leaves.append(node)
                residual.append(node.mass)
                continue
            op = a.ops[node.config.node]
            for arc, p in _distribution(a, node.config, tol):
                if p <= prob_floor:
                    suppressed.append(node.mass * p)
                    continue
                target = a.graph.arc(arc).codom
                state = _effect(op.block(arc), node.config.state, p, tol)
                bucket = by_node.get(target)
                if bucket is None:
                    bucket = by_node[target] = _Bucket(a.dim)
                child = bucket.find(state.matrix, merge_tol) if merge else None
                if child is None:
                    child = BranchNode(Configuration(target, state), 0.0, depth + 1)
                    level.append(child)
                    bucket.add(child, state.matrix)
                child.mass += node.mass * p
                child.parents += 1
                node.children.append(Edge(arc, p, child))
        depth += 1
        frontier = []
        for child in level:
            if a.graph.is_terminal(child.config.node):
                child.kind = TERMINAL
                leaves.append(child)
            else:
                frontier.append(child)
    for node in frontier:
        node.kind = UNEXPANDED
        leaves.append(node)
        residual.append(node.mass)
    return BranchTree(root, leaves, math.fsum(residual), math.fsum(suppressed))


def final_mixture(
    t: BranchTree, tol: float = DEFAULT_TOL, allow_residual: bool = False
) -> dict[str, tuple[float, DensityOperator]]:
    """Per terminal node: total mass and mass-weighted average leaf state.

    Raises :class:`ResidualMass` when more than ``tol`` of the mass never
    reached a terminal node, unless ``allow_residual`` is set.
    """
    if t.residual > tol and not allow_residual:
        raise ResidualMass(t.residual)
    acc: dict[str, list[tuple[float, np.ndarray]]] = {}
    for leaf in t.terminal_leaves:
        acc.setdefault(leaf.config.node, []).append((leaf.mass, leaf.config.state.matrix))
    out = {}
    for node, items in acc.items():
        mass = math.fsum(m for m, _ in items)
        rho = sum(m * s for m, s in items) / mass
        out[node] = (mass, make_density((rho + rho.conj().T) / 2, tol))
    return out


def total_mixture(t: BranchTree, tol: float = DEFAULT_TOL) -> DensityOperator:
    """Average state over all terminal leaves, regardless of terminal node."""
    mix = final_mixture(t, tol)
    mass = math.fsum(m for m, _ in mix.values())
    rho = sum(m * s.matrix for m, s in mix.values()) / mass
    return make_density(rho, tol)


def partial_trace(rho: DensityOperator, dims, keep, tol: float = DEFAULT_TOL) -> DensityOperator:
    """Reduce ``rho`` on ``H_{d0} (x) H_{d1} (x) ...`` to the factors in ``keep``.

    ``keep`` holds zero-based factor indices; the kept factors stay in their
    original order.
    """
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims) or math.prod(dims) != rho.dim:
        raise DimensionMismatch(f"factor dimensions {dims} do not multiply to {rho.dim}")
    keep = sorted(set(int(k) for k in keep))
    if not keep or keep[0] < 0 or keep[-1] >= len(dims):
        raise ValueError(f"keep must be a non-empty subset of factor indices 0..{len(dims) - 1}")
    n = len(dims)
    t = np.asarray(rho.matrix).reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    row = list(letters[:n])
    col = [letters[n + i] if i in keep else row[i] for i in range(n)]
    out_sub = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    reduced = np.einsum("".join(row) + "".join(col) + "->" + out_sub, t)
    d = math.prod(dims[i] for i in keep)
    return make_density(reduced.reshape(d, d), tol)


def set_op(a: AbstractQuantumAutomaton, node: str, op: QuantumOperation) -> AbstractQuantumAutomaton:
    """Copy of ``a`` with the operation at ``node`` replaced."""
    if node not in a.ops:
        raise UnknownLabel(f"node {node!r} carries no operation")
    ops = dict(a.ops)
    ops[node] = op
    return AbstractQuantumAutomaton(a.dim, a.graph, ops, a.name, a.initial_state)
