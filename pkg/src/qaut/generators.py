"""Seeded random models and states for tests and benchmarks.

Every generator takes a ``numpy.random.Generator`` so callers control the
stream. Kraus families come from orthonormalising a random complex
``(dim*|X|) x dim`` matrix and slicing it into blocks, which always satisfies
completeness.
"""

from __future__ import annotations

import numpy as np

from .automaton import AbstractQuantumAutomaton
from .classical import StochasticASM
from .graph import Arc, ControlGraph
from .quantum import (
    DensityOperator,
    IsometryMatrix,
    KrausFamily,
    OutcomeSet,
    QuantumOperation,
    make_density,
)


def _gaussian(rng: np.random.Generator, *shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _orthonormal_columns(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    q, r = np.linalg.qr(_gaussian(rng, rows, cols))
    # fix column phases so the distribution does not depend on the QR convention
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_pure_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = _gaussian(rng, dim)
    return v / np.linalg.norm(v)


def random_pure_state(rng: np.random.Generator, dim: int) -> DensityOperator:
    v = random_pure_vector(rng, dim)
    return make_density(np.outer(v, v.conj()))


def random_density(rng: np.random.Generator, dim: int, rank: int | None = None) -> DensityOperator:
    """Random mixture of ``rank`` pure states (full rank by default)."""
    rank = dim if rank is None else rank
    weights = rng.dirichlet(np.ones(rank))
    rho = np.zeros((dim, dim), dtype=np.complex128)
    for w in weights:
        v = random_pure_vector(rng, dim)
        rho += w * np.outer(v, v.conj())
    return make_density((rho + rho.conj().T) / 2)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    return _orthonormal_columns(rng, dim, dim)


def random_non_phase_unitary(rng: np.random.Generator, dim: int, tol: float = 1e-6) -> np.ndarray:
    """Random unitary that is not a diagonal phase matrix (``dim >= 2``)."""
    if dim < 2:
        raise ValueError("every 1x1 unitary is a phase")
    while True:
        v = random_unitary(rng, dim)
        if np.max(np.abs(v - np.diag(np.diag(v)))) > tol:
            return v


def outcome_labels(n: int) -> tuple[str, ...]:
    return tuple(f"x{i}" for i in range(n))


def random_isometry(rng: np.random.Generator, dim: int, n_outcomes: int) -> IsometryMatrix:
    w = _orthonormal_columns(rng, dim * n_outcomes, dim)
    return IsometryMatrix(dim, OutcomeSet(outcome_labels(n_outcomes)), w)


def random_kraus_family(rng: np.random.Generator, dim: int, outcomes) -> KrausFamily:
    labels = outcome_labels(outcomes) if isinstance(outcomes, int) else tuple(outcomes)
    w = _orthonormal_columns(rng, dim * len(labels), dim)
    blocks = {x: w[i * dim:(i + 1) * dim] for i, x in enumerate(labels)}
    return KrausFamily(dim, OutcomeSet(labels), blocks)


def random_operation(rng: np.random.Generator, dim: int, outcomes) -> QuantumOperation:
    return QuantumOperation(random_kraus_family(rng, dim, outcomes))


def random_phase_map(rng: np.random.Generator, labels) -> dict[str, float]:
    return {x: float(rng.uniform(0.0, 2 * np.pi)) for x in labels}


def random_graph(rng: np.random.Generator, max_nodes: int = 4, max_extra_arcs: int = 3) -> ControlGraph:
    """Valid control graph with 2..max_nodes nodes and one terminal.

    A chain ``n0 -> n1 -> ... -> t`` makes every node reachable and
    co-reachable; extra arcs among non-terminal nodes (self loops and back
    arcs included) or into the terminal add branching and cycles.
    """
    k = int(rng.integers(2, max_nodes + 1))
    nodes = tuple(f"n{i}" for i in range(k - 1)) + ("t",)
    arcs = [Arc(f"a{i}", nodes[i], nodes[i + 1]) for i in range(k - 1)]
    for j in range(int(rng.integers(0, max_extra_arcs + 1))):
        dom = nodes[int(rng.integers(0, k - 1))]
        codom = nodes[int(rng.integers(0, k))]
        arcs.append(Arc(f"b{j}", dom, codom))
    return ControlGraph(nodes, tuple(arcs), nodes[0], frozenset({"t"}))


def random_automaton(
    rng: np.random.Generator, dim: int | None = None, max_nodes: int = 4, max_extra_arcs: int = 3
) -> AbstractQuantumAutomaton:
    dim = int(rng.integers(2, 5)) if dim is None else dim
    g = random_graph(rng, max_nodes, max_extra_arcs)
    ops = {}
    for n in g.nodes:
        if g.is_terminal(n):
            continue
        labels = tuple(a.id for a in g.arcs if a.dom == n)
        ops[n] = random_operation(rng, dim, labels)
    return AbstractQuantumAutomaton(dim, g, ops, "random", random_density(rng, dim))


def random_asm(
    rng: np.random.Generator, max_nodes: int = 4, max_snapshots: int = 4, max_extra_arcs: int = 3
) -> StochasticASM:
    """Random stochastic machine; probabilities are zero or at least 0.05."""
    g = random_graph(rng, max_nodes, max_extra_arcs)
    snaps = tuple(f"s{i}" for i in range(int(rng.integers(1, max_snapshots + 1))))
    transforms = {a.id: {s: snaps[int(rng.integers(0, len(snaps)))] for s in snaps} for a in g.arcs}
    dist = {}
    for n in g.nodes:
        if g.is_terminal(n):
            continue
        out = [a.id for a in g.arcs if a.dom == n]
        for s in snaps:
            p = rng.dirichlet(np.ones(len(out)))
            if len(out) > 1 and rng.random() < 0.3:
                p[int(rng.integers(0, len(out)))] = 0.0
            p = np.maximum(p, 0.05) * (p > 0)
            p = p / p.sum()
            dist[(n, s)] = {a: float(q) for a, q in zip(out, p)}
    return StochasticASM(g, snaps, transforms, dist, "random", snaps[0])
