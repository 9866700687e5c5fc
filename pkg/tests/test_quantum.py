import cmath
import itertools
import math

import numpy as np
import pytest

from qaut import generators as gen
from qaut import linalg
from qaut.errors import (
    CompletenessViolation,
    DimensionMismatch,
    NotHermitian,
    NotIsometric,
    NotPSD,
    NotUnitary,
    TraceNotOne,
    UnknownLabel,
    ZeroProbabilityOutcome,
)
from qaut.quantum import (
    IsometryMatrix,
    KrausFamily,
    OutcomeSet,
    QuantumOperation,
    apply_effect,
    apply_phases,
    embed_outcome,
    inequivalence_witness,
    isometric_probability,
    isometry_to_kraus,
    kraus_to_isometry,
    make_density,
    mix,
    outcome_distribution,
    outcome_probability,
    outcome_projector,
    phase_equivalent,
    pure_state,
    unitary_as_operation,
)

S = 1 / math.sqrt(2)
H = np.array([[S, S], [S, -S]])
P0 = np.diag([1.0, 0.0])
P1 = np.diag([0.0, 1.0])
PLUS = np.array([[S], [S]])


def basis_measurement():
    return QuantumOperation.from_blocks({"0": P0, "1": P1})


def hadamard_measurement():
    return QuantumOperation.from_blocks({"0": H @ P0 @ H, "1": H @ P1 @ H})


class TestDensity:
    def test_maximally_mixed_is_valid(self):
        assert make_density(np.eye(2) / 2).purity() == pytest.approx(0.5)

    def test_trace_two_rejected(self):
        with pytest.raises(TraceNotOne) as e:
            make_density(np.eye(2))
        assert e.value.trace == pytest.approx(2.0)

    def test_negative_eigenvalue_reported(self):
        with pytest.raises(NotPSD) as e:
            make_density(np.diag([1.5, -0.5]))
        assert e.value.min_eigenvalue == pytest.approx(-0.5)

    def test_non_hermitian_rejected(self):
        with pytest.raises(NotHermitian):
            make_density([[0.5, 0.5], [0.0, 0.5]])

    def test_plus_projector_is_pure(self):
        rho = make_density(np.ones((2, 2)) / 2)
        assert rho.purity() == pytest.approx(1.0, abs=1e-12)

    def test_pure_state_of_basis_vector(self):
        assert np.array_equal(pure_state([[1], [0]]).matrix, P0)

    def test_pure_state_matches_outer_product(self):
        rho = pure_state(PLUS)
        assert linalg.max_abs_diff(rho.matrix, np.full((2, 2), 0.5)) < 1e-15

    def test_pure_state_rejects_zero_and_unnormalised(self):
        with pytest.raises(ValueError):
            pure_state([[0], [0]])
        with pytest.raises(ValueError):
            pure_state([[1], [1]])
        assert pure_state([[1], [1]], normalize=True).purity() == pytest.approx(1.0)

    def test_mix(self, rng):
        rho = gen.random_density(rng, 3)
        assert linalg.max_abs_diff(mix([(1.0, rho)]).matrix, rho.matrix) < 1e-15
        half = mix([(0.5, make_density(P0)), (0.5, make_density(P1))])
        assert np.allclose(half.matrix, np.eye(2) / 2)
        ens = [(w, gen.random_pure_state(rng, 3)) for w in rng.dirichlet(np.ones(3))]
        assert abs(linalg.trace(mix(ens).matrix) - 1) < 1e-12

    def test_mix_rejects_bad_weights_and_dims(self):
        with pytest.raises(ValueError):
            mix([(0.7, make_density(P0)), (0.7, make_density(P1))])
        with pytest.raises(DimensionMismatch):
            mix([(0.5, make_density(P0)), (0.5, make_density(np.eye(3) / 3))])

    def test_matrix_is_read_only(self):
        src = np.eye(2) / 2
        rho = make_density(src)
        with pytest.raises(ValueError):
            rho.matrix[0, 0] = 1
        src[0, 0] = 7  # the caller's array stays writeable and independent
        assert rho.matrix[0, 0] == 0.5


class TestEmbedding:
    def test_trivial(self):
        assert np.array_equal(embed_outcome(1, ("a",), "a"), [[1]])

    def test_second_outcome_block(self):
        j = embed_outcome(2, ("0", "1"), "1")
        assert np.array_equal(j[:2], np.zeros((2, 2)))
        assert np.array_equal(j[2:], np.eye(2))

    def test_embedding_acts_as_tensor_with_outcome_ket(self):
        labels = ("a", "b", "c")
        for i, x in enumerate(labels):
            for k in range(3):
                ket = linalg.basis_vector(3, k)
                expected = linalg.kron(linalg.basis_vector(3, i), ket)  # outcome-major
                assert np.array_equal(embed_outcome(3, labels, x) @ ket, expected)

    def test_unknown_label(self):
        with pytest.raises(UnknownLabel):
            embed_outcome(2, ("0", "1"), "2")

    @pytest.mark.parametrize("dim,n", list(itertools.product(range(1, 5), range(1, 5))))
    def test_identities(self, dim, n):
        labels = gen.outcome_labels(n)
        for x1 in labels:
            for x2 in labels:
                j1, j2 = embed_outcome(dim, labels, x1), embed_outcome(dim, labels, x2)
                delta = np.eye(dim) if x1 == x2 else np.zeros((dim, dim))
                assert linalg.max_abs_diff(j1.conj().T @ j2, delta) <= 1e-12
                assert linalg.max_abs_diff(j1 @ j2.conj().T, outcome_projector(dim, labels, x1, x2)) <= 1e-12


class TestIsometry:
    def test_single_unitary_outcome(self):
        w = kraus_to_isometry(KrausFamily.from_blocks({"u": np.eye(2)}))
        assert np.array_equal(w.matrix, np.eye(2))
        k = isometry_to_kraus(IsometryMatrix(2, OutcomeSet(("u",)), np.eye(2)))
        assert np.array_equal(k["u"], np.eye(2))

    def test_basis_measurement_layout(self):
        w = kraus_to_isometry(basis_measurement().kraus).matrix
        expected = np.zeros((4, 2))
        expected[0, 0] = expected[3, 1] = 1
        assert np.array_equal(w, expected)
        back = isometry_to_kraus(IsometryMatrix(2, OutcomeSet(("0", "1")), expected))
        assert np.array_equal(back["0"], P0) and np.array_equal(back["1"], P1)

    def test_random_families_give_isometries(self, rng):
        for _ in range(30):
            k = gen.random_kraus_family(rng, int(rng.integers(2, 6)), int(rng.integers(1, 5)))
            w = kraus_to_isometry(k).matrix
            assert linalg.max_abs_diff(w.conj().T @ w, np.eye(k.dim)) <= 1e-9
            again = isometry_to_kraus(kraus_to_isometry(k))
            assert all(np.array_equal(again[x], k[x]) for x in k.outcomes)

    def test_random_isometry_roundtrip(self, rng):
        for _ in range(10):
            w = gen.random_isometry(rng, 2, 3)
            assert w.matrix.shape == (6, 2)
            assert linalg.max_abs_diff(kraus_to_isometry(isometry_to_kraus(w)).matrix, w.matrix) <= 1e-12

    def test_incomplete_family_rejected(self):
        with pytest.raises(CompletenessViolation):
            KrausFamily.from_blocks({"0": P0, "1": P0})

    def test_non_isometry_rejected(self):
        with pytest.raises(NotIsometric):
            IsometryMatrix(2, OutcomeSet(("0", "1")), np.ones((4, 2)))


class TestBornRule:
    def test_maximally_mixed(self):
        op = basis_measurement()
        rho = make_density(np.eye(2) / 2)
        assert outcome_probability(op, "0", rho) == pytest.approx(0.5)
        assert outcome_distribution(op, rho) == pytest.approx({"0": 0.5, "1": 0.5})

    def test_basis_state(self):
        op = basis_measurement()
        rho = make_density(P0)
        assert outcome_probability(op, "0", rho) == 1.0
        assert outcome_probability(op, "1", rho) == 0.0

    def test_plus_state_trace_formula(self):
        rho = pure_state(PLUS)
        p = np.trace(rho.matrix @ P0.conj().T @ P0).real
        assert outcome_probability(basis_measurement(), "0", rho) == pytest.approx(p, abs=1e-15)
        assert p == pytest.approx(0.5, abs=1e-15)

    def test_isometric_formula_agrees(self, rng):
        for _ in range(30):
            dim, n = int(rng.integers(2, 5)), int(rng.integers(1, 4))
            op = gen.random_operation(rng, dim, n)
            rho = gen.random_density(rng, dim)
            w = op.isometry()
            for x in op.outcomes:
                assert abs(outcome_probability(op, x, rho) - isometric_probability(w, x, rho)) <= 1e-9

    def test_distribution_sums_to_one(self, rng):
        for _ in range(30):
            dim = int(rng.integers(2, 6))
            op = gen.random_operation(rng, dim, int(rng.integers(1, 5)))
            assert abs(sum(outcome_distribution(op, gen.random_density(rng, dim)).values()) - 1) <= 1e-9

    def test_single_outcome_unitary(self):
        op = unitary_as_operation(H)
        assert outcome_distribution(op, make_density(P0)) == pytest.approx({"·": 1.0})

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            outcome_probability(basis_measurement(), "0", make_density(np.eye(3) / 3))

    def test_unknown_outcome(self):
        with pytest.raises(UnknownLabel):
            outcome_probability(basis_measurement(), "2", make_density(P0))


class TestEffect:
    def test_measurement_collapses(self):
        out = apply_effect(basis_measurement(), "0", pure_state(PLUS))
        assert linalg.max_abs_diff(out.matrix, P0) < 1e-15

    def test_unitary_flip(self):
        x = unitary_as_operation([[0, 1], [1, 0]])
        assert np.array_equal(apply_effect(x, "·", make_density(P0)).matrix, P1)

    def test_zero_probability(self):
        with pytest.raises(ZeroProbabilityOutcome):
            apply_effect(basis_measurement(), "1", make_density(P0))

    def test_random_effects_are_states(self, rng):
        for _ in range(30):
            dim = int(rng.integers(2, 5))
            op = gen.random_operation(rng, dim, 3)
            rho = gen.random_density(rng, dim)
            for x in op.outcomes:
                make_density(apply_effect(op, x, rho).matrix, 1e-9)


class TestUnitary:
    def test_identity_and_hadamard(self):
        assert np.array_equal(unitary_as_operation(np.eye(2)).block("·"), np.eye(2))
        out = apply_effect(unitary_as_operation(H), "·", make_density(P0))
        assert linalg.max_abs_diff(out.matrix, np.full((2, 2), 0.5)) < 1e-15

    def test_non_unitary(self):
        with pytest.raises(NotUnitary):
            unitary_as_operation([[1, 1], [0, 1]])


class TestPhaseEquivalence:
    def test_self(self):
        assert phase_equivalent(basis_measurement(), basis_measurement()) == {"0": 0.0, "1": 0.0}

    def test_single_phase_recovered(self):
        op = basis_measurement()
        b = QuantumOperation.from_blocks({"0": cmath.exp(1j * math.pi / 3) * P0, "1": P1})
        thetas = phase_equivalent(op, b)
        assert thetas["0"] == pytest.approx(math.pi / 3, abs=1e-9)
        assert thetas["1"] == 0.0

    def test_basis_vs_hadamard(self):
        assert phase_equivalent(basis_measurement(), hadamard_measurement()) is None
        assert inequivalence_witness(basis_measurement(), hadamard_measurement()) == "0"

    def test_zero_blocks_get_zero_phase(self):
        a = QuantumOperation.from_blocks({"u": np.eye(2), "z": np.zeros((2, 2))})
        assert phase_equivalent(a, apply_phases(a, {"u": 1.0, "z": 2.0})) == pytest.approx({"u": 1.0, "z": 0.0})

    def test_random_phases_recovered_and_invisible(self, rng):
        for _ in range(30):
            dim = int(rng.integers(2, 5))
            op = gen.random_operation(rng, dim, int(rng.integers(1, 5)))
            theta = gen.random_phase_map(rng, op.outcomes)
            b = apply_phases(op, theta)
            got = phase_equivalent(op, b)
            assert got is not None
            for x in op.outcomes:
                d = abs(got[x] - theta[x]) % (2 * math.pi)
                assert min(d, 2 * math.pi - d) <= 1e-9
            rho = gen.random_density(rng, dim)
            for x in op.outcomes:
                assert abs(outcome_probability(op, x, rho) - outcome_probability(b, x, rho)) <= 1e-9
                diff = apply_effect(op, x, rho).matrix - apply_effect(b, x, rho).matrix
                assert np.max(np.abs(diff)) <= 1e-9

    def test_outcome_mismatch(self):
        with pytest.raises(UnknownLabel):
            phase_equivalent(basis_measurement(), QuantumOperation.from_blocks({"a": P0, "b": P1}))
        with pytest.raises(DimensionMismatch):
            phase_equivalent(basis_measurement(), QuantumOperation.from_blocks({"0": np.eye(3)}))
