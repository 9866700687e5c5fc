"""Acceptance criteria 1-10, each at its stated tolerance.

Every test prints one ``[PASS]``/``[FAIL]`` line; the lines are also collected
and repeated in the pytest terminal summary. Run this file directly with
``python tests/test_acceptance.py`` for the lines alone.
"""

import math
import time

import numpy as np

from conftest import CORPUS_NAMES, corpus_path, load_corpus
from qaut import dsl
from qaut import generators as gen
from qaut.automaton import (
    TERMINAL,
    Configuration,
    enumerate_runs,
    final_mixture,
    outcome_probabilities,
    partial_trace,
    sample_run,
)
from qaut.classical import embed_as_quantum, enumerate_classical
from qaut.linalg import max_abs_diff
from qaut.quantum import (
    IsometryMatrix,
    QuantumOperation,
    apply_phases,
    embed_outcome,
    isometry_to_kraus,
    kraus_to_isometry,
    make_density,
    outcome_projector,
    phase_equivalent,
)

RESULTS: dict[int, str] = {}

P0 = np.diag([1.0, 0.0])
P1 = np.diag([0.0, 1.0])
BELL = np.zeros((4, 4))
BELL[np.ix_([0, 3], [0, 3])] = 0.5


def report(n: int, ok: bool, detail: str):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n:>2}: {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def rng_for(n: int) -> np.random.Generator:
    return np.random.default_rng(1000 + n)


def test_criterion_01_cleaner():
    a = load_corpus("cleaner")
    rng = rng_for(1)
    states = [gen.random_density(rng, 2) for _ in range(50)]
    worst, residual = 0.0, 0.0
    with Timer() as t:
        for rho in states:
            tree = enumerate_runs(a, rho, max_steps=8)
            residual = max(residual, tree.residual)
            (mass, out), = final_mixture(tree).values()
            worst = max(worst, max_abs_diff(out.matrix, P0), abs(mass - 1))
    ok = residual == 0.0 and worst <= 1e-9 and t.elapsed < 1.0
    report(1, ok, f"cleaner -> |0><0| on 50 states: max diff {worst:.2e}, residual {residual}, {t.elapsed:.3f} s")


def test_criterion_02_entangler():
    a = load_corpus("entangler")
    rng = rng_for(2)
    states = [gen.random_density(rng, 4) for _ in range(50)]
    worst = 0.0
    with Timer() as t:
        for rho in states:
            (mass, out), = final_mixture(enumerate_runs(a, rho)).values()
            worst = max(worst, max_abs_diff(out.matrix, BELL), abs(mass - 1))
    ok = worst <= 1e-9 and t.elapsed < 1.0
    report(2, ok, f"entangler -> Bell projector on 50 states: max diff {worst:.2e}, {t.elapsed:.3f} s")


def test_criterion_03_teleport():
    a = load_corpus("teleport")
    rng = rng_for(3)
    psis = [gen.random_pure_state(rng, 2) for _ in range(20)]
    rhos = [gen.random_density(rng, 4) for _ in range(20)]
    classical = np.diag([0.25, 0.25, 0.25, 0.25])
    worst_mass = worst_state = worst_reduced = 0.0
    leaf_counts = set()
    with Timer() as t:
        for psi in psis:
            expected = np.kron(classical, psi.matrix)
            for rho in rhos:
                tree = enumerate_runs(a, make_density(np.kron(psi.matrix, rho.matrix)))
                leaves = tree.terminal_leaves
                leaf_counts.add(len(leaves))
                worst_mass = max([worst_mass] + [abs(leaf.mass - 0.25) for leaf in leaves])
                (_, out), = final_mixture(tree).values()
                worst_state = max(worst_state, max_abs_diff(out.matrix, expected))
                reduced = partial_trace(out, [2, 2, 2], [2])
                worst_reduced = max(worst_reduced, max_abs_diff(reduced.matrix, psi.matrix))
    ok = leaf_counts == {4} and max(worst_mass, worst_state, worst_reduced) <= 1e-9 and t.elapsed < 5.0
    report(
        3, ok,
        f"teleport on 20x20 inputs: leaves {sorted(leaf_counts)}, mass err {worst_mass:.2e}, "
        f"state err {worst_state:.2e}, qubit-3 err {worst_reduced:.2e}, {t.elapsed:.3f} s",
    )


def test_criterion_04_isometry_roundtrip():
    rng = rng_for(4)
    worst_iso = worst_rt = 0.0
    with Timer() as t:
        for _ in range(200):
            dim, n = int(rng.integers(2, 7)), int(rng.integers(1, 5))
            k = gen.random_kraus_family(rng, dim, n)
            w = kraus_to_isometry(k)
            worst_iso = max(worst_iso, max_abs_diff(w.matrix.conj().T @ w.matrix, np.eye(dim)))
            k2 = isometry_to_kraus(w)
            worst_rt = max([worst_rt] + [max_abs_diff(k2[x], k[x]) for x in k.outcomes])
            w2 = kraus_to_isometry(isometry_to_kraus(IsometryMatrix(dim, w.outcomes, w.matrix)))
            worst_rt = max(worst_rt, max_abs_diff(w2.matrix, w.matrix))
    ok = worst_iso <= 1e-9 and worst_rt <= 1e-12 and t.elapsed < 5.0
    report(4, ok, f"200 families: W*W-I {worst_iso:.2e}, roundtrip {worst_rt:.2e}, {t.elapsed:.3f} s")


def _outcome_rotation(op: QuantumOperation, v: np.ndarray) -> QuantumOperation:
    """``(V (x) 1) W``: mixes the Kraus blocks by the unitary ``V`` on the outcome factor."""
    w = kraus_to_isometry(op.kraus)
    rotated = np.kron(v, np.eye(op.dim)) @ w.matrix
    return QuantumOperation(isometry_to_kraus(IsometryMatrix(op.dim, w.outcomes, rotated)))


def test_criterion_05_phase_equivalence():
    rng = rng_for(5)
    worst_phase = 0.0
    equiv_ok = inequiv_ok = 0
    with Timer() as t:
        for _ in range(100):
            op = gen.random_operation(rng, int(rng.integers(2, 5)), int(rng.integers(1, 5)))
            theta = gen.random_phase_map(rng, op.outcomes)
            got = phase_equivalent(op, apply_phases(op, theta))
            if got is None:
                continue
            equiv_ok += 1
            for x in op.outcomes:
                if np.max(np.abs(op.block(x))) > 1e-9:
                    d = abs(got[x] - theta[x]) % (2 * math.pi)
                    worst_phase = max(worst_phase, min(d, 2 * math.pi - d))
        for _ in range(100):
            n = int(rng.integers(2, 5))
            op = gen.random_operation(rng, int(rng.integers(2, 5)), n)
            v = gen.random_non_phase_unitary(rng, n)
            if phase_equivalent(op, _outcome_rotation(op, v)) is None:
                inequiv_ok += 1
    ok = equiv_ok == 100 and worst_phase <= 1e-9 and inequiv_ok == 100 and t.elapsed < 5.0
    report(
        5, ok,
        f"equivalent {equiv_ok}/100 (phase err {worst_phase:.2e}), not-equivalent {inequiv_ok}/100, {t.elapsed:.3f} s",
    )


def test_criterion_06_embedding_identities():
    worst = 0.0
    with Timer() as t:
        for dim in range(1, 5):
            for n in range(1, 5):
                labels = gen.outcome_labels(n)
                js = {x: embed_outcome(dim, labels, x) for x in labels}
                for x1 in labels:
                    for x2 in labels:
                        delta = np.eye(dim) if x1 == x2 else np.zeros((dim, dim))
                        worst = max(worst, max_abs_diff(js[x1].conj().T @ js[x2], delta))
                        proj = outcome_projector(dim, labels, x1, x2)
                        worst = max(worst, max_abs_diff(js[x1] @ js[x2].conj().T, proj))
    ok = worst <= 1e-12 and t.elapsed < 1.0
    report(6, ok, f"dims 1-4 x outcomes 1-4: max deviation {worst:.2e}, {t.elapsed:.3f} s")


def _reachable_sums(a, rho0, max_steps):
    tree = enumerate_runs(a, rho0, max_steps=max_steps)
    for node in tree.nodes():
        if not a.graph.is_terminal(node.config.node):
            yield math.fsum(outcome_probabilities(a, node.config).values())


def test_criterion_07_step_normalisation():
    rng = rng_for(7)
    worst, count = 0.0, 0
    models = [(load_corpus(n), 64) for n in CORPUS_NAMES] + [(gen.random_automaton(rng), 6) for _ in range(50)]
    for a, depth in models:
        starts = [a.initial_state] + [gen.random_density(rng, a.dim) for _ in range(3)]
        for rho in starts:
            for s in _reachable_sums(a, rho, depth):
                worst = max(worst, abs(s - 1))
                count += 1
    report(7, worst <= 1e-9, f"{count} reachable configurations: max |sum - 1| = {worst:.2e}")


def test_criterion_08_classical_cross_validation():
    rng = rng_for(8)
    worst, compared = 0.0, 0
    for _ in range(30):
        m = gen.random_asm(rng, max_nodes=4, max_snapshots=4)
        q = embed_as_quantum(m)
        for i, s0 in enumerate(m.snapshots):
            expected = enumerate_classical(m, s0, max_steps=16).masses
            rho = np.zeros((q.dim, q.dim))
            rho[i, i] = 1.0
            tree = enumerate_runs(q, make_density(rho), max_steps=16)
            got: dict[tuple[str, str], float] = {}
            for leaf in tree.terminal_leaves:
                for j, s in enumerate(m.snapshots):
                    w = leaf.mass * leaf.config.state.matrix[j, j].real
                    if w != 0.0:
                        got[(leaf.config.node, s)] = got.get((leaf.config.node, s), 0.0) + w
            for key in set(got) | set(expected):
                worst = max(worst, abs(got.get(key, 0.0) - expected.get(key, 0.0)))
                compared += 1
    report(8, worst <= 1e-9, f"30 machines, {compared} terminal masses: max diff {worst:.2e}")


def _leaf_key(leaves, node, depth, state):
    for i, leaf in enumerate(leaves):
        if leaf.config.node == node and leaf.depth == depth and max_abs_diff(leaf.config.state.matrix, state) <= 1e-9:
            return i
    return None


def test_criterion_09_sampling_consistency():
    runs = 10_000
    lines, ok = [], True
    for name in CORPUS_NAMES:
        a = load_corpus(name)
        rho0 = a.initial_state
        tree = enumerate_runs(a, rho0)
        leaves = [leaf for leaf in tree.leaves if leaf.kind == TERMINAL]
        node_counts: dict[str, int] = {}
        leaf_counts = [0] * len(leaves)
        unmatched = 0
        for seed in range(runs):
            tr = sample_run(a, rho0, seed)
            node_counts[tr.final.node] = node_counts.get(tr.final.node, 0) + 1
            k = _leaf_key(leaves, tr.final.node, len(tr.steps) - 1, tr.final.state.matrix)
            if k is None:
                unmatched += 1
            else:
                leaf_counts[k] += 1
        checks = [(tree.terminal_distribution().get(n, 0.0), c) for n, c in node_counts.items()]
        checks += [(leaf.mass, c) for leaf, c in zip(leaves, leaf_counts)]
        worst_margin = min(3 * math.sqrt(p * (1 - p) / runs) + 0.01 - abs(c / runs - p) for p, c in checks)
        ok = ok and unmatched == 0 and worst_margin >= 0
        lines.append(f"{name} {len(leaves)} leaves, slack {worst_margin:.4f}")
    report(9, ok, f"{runs} runs each: " + "; ".join(lines))


def _mutate(text: str, rng: np.random.Generator):
    from test_dsl import mutate

    return mutate(text, rng)


def test_criterion_10_dsl_round_trip():
    worst = 0.0
    for name in CORPUS_NAMES:
        text = corpus_path(name).read_text(encoding="utf-8")
        a = dsl.elaborate(dsl.parse(dsl.SourceDoc(text, name)))
        b = dsl.elaborate(dsl.parse(dsl.serialize(a)))
        rng = rng_for(10)
        states = [a.initial_state] + [gen.random_density(rng, a.dim) for _ in range(5)]
        for n in a.ops:
            for rho in states:
                pa = outcome_probabilities(a, Configuration(n, rho))
                pb = outcome_probabilities(b, Configuration(n, rho))
                worst = max([worst] + [abs(pa[x] - pb[x]) for x in pa])
            for x in a.ops[n].outcomes:
                worst = max(worst, max_abs_diff(a.ops[n].block(x), b.ops[n].block(x)))
    rng = rng_for(10)
    located = 0
    for i in range(20):
        name = CORPUS_NAMES[i % len(CORPUS_NAMES)]
        bad, line = _mutate(corpus_path(name).read_text(encoding="utf-8"), rng)
        try:
            dsl.loads(bad, name)
        except dsl.DslError as e:
            if any(d.pos.line == line for d in e.diagnostics):
                located += 1
    ok = worst <= 1e-15 and located == 20
    report(10, ok, f"round-trip max diff {worst:.2e}; {located}/20 mutations diagnosed on the corrupted line")


if __name__ == "__main__":
    import sys

    failed = 0
    for fn in [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]:
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
