import math

import numpy as np
import pytest

from qaut import generators as gen
from qaut.automaton import enumerate_runs, validate_automaton
from qaut.classical import (
    CONVERGED,
    EXHAUSTED,
    StochasticASM,
    embed_as_quantum,
    enumerate_classical,
    sample_classical_run,
    validate_asm,
)
from qaut.graph import make_graph, out_arcs
from qaut.quantum import make_density


def chain():
    g = make_graph(["a", "b", "t"], [("x", "a", "b"), ("y", "b", "t")], "a", ["t"])
    snaps = ("s0", "s1")
    swap = {"s0": "s1", "s1": "s0"}
    dist = {(n, s): {arc: 1.0} for n, arc in (("a", "x"), ("b", "y")) for s in snaps}
    return StochasticASM(g, snaps, {"x": swap, "y": dict(swap)}, dist)


def fair_coin():
    g = make_graph(["c", "t"], [("h", "c", "t"), ("tl", "c", "t")], "c", ["t"])
    snaps = ("u", "H", "T")
    transforms = {"h": {s: "H" for s in snaps}, "tl": {s: "T" for s in snaps}}
    dist = {("c", s): {"h": 0.5, "tl": 0.5} for s in snaps}
    return StochasticASM(g, snaps, transforms, dist, "coin", "u")


def biased_retry(p_win=0.3):
    """Win with ``p_win`` per attempt; the snapshot counts failed attempts, saturating at 3."""
    g = make_graph(["c", "t"], [("win", "c", "t"), ("retry", "c", "c")], "c", ["t"])
    snaps = ("k0", "k1", "k2", "k3")
    transforms = {
        "win": {s: s for s in snaps},
        "retry": {"k0": "k1", "k1": "k2", "k2": "k3", "k3": "k3"},
    }
    dist = {("c", s): {"win": p_win, "retry": 1 - p_win} for s in snaps}
    return StochasticASM(g, snaps, transforms, dist, "retry", "k0")


def self_loop(p=1.0):
    g = make_graph(["c", "t"], [("loop", "c", "c"), ("out", "c", "t")], "c", ["t"])
    snaps = ("s",)
    return StochasticASM(g, snaps, {"loop": {"s": "s"}, "out": {"s": "s"}}, {("c", "s"): {"loop": p, "out": 1 - p}})


def quantum_masses(m, s0, max_steps):
    q = embed_as_quantum(m)
    rho = np.zeros((q.dim, q.dim))
    rho[m.snapshots.index(s0), m.snapshots.index(s0)] = 1
    tree = enumerate_runs(q, make_density(rho), max_steps=max_steps)
    out = {}
    for leaf in tree.terminal_leaves:
        for i, s in enumerate(m.snapshots):
            w = leaf.mass * leaf.config.state.matrix[i, i].real
            if w > 0:
                key = (leaf.config.node, s)
                out[key] = out.get(key, 0.0) + w
    return out, tree


class TestValidate:
    def test_deterministic_machine_ok(self):
        assert validate_asm(chain()) == []

    def test_probability_on_foreign_arc(self):
        m = fair_coin()
        m.dist[("c", "u")]["ghost"] = 0.3
        assert any("not in Out(c)" in v.message for v in validate_asm(m))

    def test_subnormalised_row(self):
        m = fair_coin()
        m.dist[("c", "H")]["h"] = 0.4
        vs = validate_asm(m)
        assert any(v.subject == "c,H" and "sum to 0.9" in v.message for v in vs)

    def test_bad_transform(self):
        m = fair_coin()
        m.transforms["h"]["u"] = "nowhere"
        assert any(v.condition == "transform" for v in validate_asm(m))

    def test_every_row_has_a_positive_arc(self, rng):
        for _ in range(50):
            m = gen.random_asm(rng)
            assert validate_asm(m) == []
            for n in m.graph.nodes:
                if not m.graph.is_terminal(n):
                    for s in m.snapshots:
                        assert any(m.prob(a, s, n) > 0 for a in out_arcs(m.graph, n))


class TestSampling:
    def test_single_arc_to_terminal(self):
        m = chain()
        for seed in range(5):
            t = sample_classical_run(m, "s0", seed)
            assert t.status == CONVERGED and t.final == ("t", "s0")
            assert [s.arc for s in t.steps] == ["x", "y", None]

    def test_fair_coin_traces_replay(self):
        m = self_loop(0.5)
        for seed in range(100):
            t = sample_classical_run(m, "s", seed, max_steps=50)
            # each transition must be a legal, positive-probability arc
            for cur, nxt in zip(t.steps, t.steps[1:]):
                arc = m.graph.arc(cur.arc)
                assert arc.dom == cur.node and arc.codom == nxt.node
                assert m.prob(cur.arc, cur.snapshot, cur.node) > 0
                assert nxt.snapshot == m.apply(cur.arc, cur.snapshot)
            assert (t.status == CONVERGED) == (t.final[0] == "t")

    def test_diverging_run(self):
        t = sample_classical_run(self_loop(1.0), "s", 3, max_steps=7)
        assert t.status == EXHAUSTED and len(t.steps) == 8

    def test_seeded_and_seed_independent_when_deterministic(self):
        m = biased_retry()
        assert sample_classical_run(m, "k0", 11) == sample_classical_run(m, "k0", 11)
        assert len({sample_classical_run(chain(), "s1", s) for s in range(10)}) == 1

    def test_zero_steps_rejected(self):
        with pytest.raises(ValueError):
            sample_classical_run(chain(), "s0", 0, max_steps=0)


class TestEnumerate:
    def test_chain(self):
        d = enumerate_classical(chain(), "s0")
        assert d.masses == {("t", "s0"): 1.0} and d.residual == 0.0

    def test_fair_coin(self):
        d = enumerate_classical(fair_coin(), "u")
        assert d.masses == {("t", "H"): 0.5, ("t", "T"): 0.5}

    def test_geometric_series(self):
        p, q, n = 0.3, 0.7, 10
        d = enumerate_classical(biased_retry(p), "k0", max_steps=n)
        expected = {("t", f"k{k}"): q**k * p for k in range(3)}
        expected[("t", "k3")] = math.fsum(q**k * p for k in range(3, n))
        assert d.masses.keys() == expected.keys()
        for key, mass in expected.items():
            assert d.masses[key] == pytest.approx(mass, abs=1e-15)
        assert d.residual == pytest.approx(q**n, abs=1e-15)

    def test_mass_conservation(self, rng):
        for _ in range(50):
            m = gen.random_asm(rng)
            d = enumerate_classical(m, m.snapshots[0], max_steps=12)
            assert all(v >= 0 for v in d.masses.values())
            assert abs(math.fsum(d.masses.values()) + d.residual - 1) <= 1e-12

    def test_pruning_moves_mass_to_residual(self):
        d = enumerate_classical(biased_retry(), "k0", max_steps=40, prune_eps=0.01)
        assert abs(math.fsum(d.masses.values()) + d.residual - 1) <= 1e-12
        assert d.residual > 0.7**40


class TestEmbedding:
    def test_deterministic_gives_partial_permutations(self):
        q = embed_as_quantum(chain())
        assert validate_automaton(q) == []
        for op in q.ops.values():
            assert len(op.outcomes) == 1
            k = op.block(op.outcomes.labels[0])
            assert set(np.unique(k)) <= {0, 1}
            assert (k != 0).sum(axis=0).max() <= 1 and (k != 0).sum(axis=1).max() <= 1

    @pytest.mark.parametrize("make,s0", [(fair_coin, "u"), (biased_retry, "k0"), (chain, "s1")])
    def test_agrees_with_classical(self, make, s0):
        m = make()
        expected = enumerate_classical(m, s0, max_steps=10).masses
        got, _ = quantum_masses(m, s0, 10)
        assert got.keys() == expected.keys()
        for key in expected:
            assert got[key] == pytest.approx(expected[key], abs=1e-9)

    def test_merging_transform_is_split(self):
        # both snapshots map to the same image under "go" with positive probability
        g = make_graph(["c", "t"], [("go", "c", "t"), ("stay", "c", "t")], "c", ["t"])
        snaps = ("a", "b")
        m = StochasticASM(
            g, snaps,
            {"go": {"a": "a", "b": "a"}, "stay": {"a": "a", "b": "b"}},
            {("c", "a"): {"go": 0.5, "stay": 0.5}, ("c", "b"): {"go": 0.25, "stay": 0.75}},
        )
        q = embed_as_quantum(m)
        assert validate_automaton(q) == []
        assert set(q.ops["c"].outcomes.labels) == {"go@a", "go@b", "stay"}
        for s0 in snaps:
            got, _ = quantum_masses(m, s0, 4)
            expected = enumerate_classical(m, s0).masses
            assert got == pytest.approx(expected, abs=1e-12)

    def test_random_machines_all_basis_states(self, rng):
        for _ in range(20):
            m = gen.random_asm(rng)
            for s0 in m.snapshots:
                d = enumerate_classical(m, s0, max_steps=12)
                got, tree = quantum_masses(m, s0, 12)
                for key in set(got) | set(d.masses):
                    assert abs(got.get(key, 0.0) - d.masses.get(key, 0.0)) <= 1e-9
                assert abs(tree.residual - d.residual) <= 1e-9
