"""States, Kraus families, isometries and the Born/effect rules.

Layout convention: an isometry ``W: H_n -> H_n (x) l2(X)`` is stored as a
``(n*|X|) x n`` matrix whose rows are grouped by outcome. The block of rows
for outcome ``x`` starts at ``X.index(x) * n``, so ``K(x) = J(x)* W`` is a
contiguous slice. In this layout the operator ``1 (x) |x'><x''|`` is the
matrix ``kron(|x'><x''|, I_n)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import InitVar, dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import linalg
from .errors import (
    CompletenessViolation,
    DimensionMismatch,
    NotIsometric,
    NotPSD,
    NotUnitary,
    ProbabilityOutOfRange,
    TraceNotOne,
    UnknownLabel,
    ZeroProbabilityOutcome,
)
from .linalg import DEFAULT_TOL

DEFAULT_PROB_FLOOR = 1e-12
UNITARY_LABEL = "·"


@dataclass(frozen=True)
class OutcomeSet:
    """Ordered finite set of outcome labels."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        if not labels:
            raise ValueError("outcome set must be non-empty")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate outcome labels in {labels}")
        object.__setattr__(self, "labels", labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabel(f"unknown outcome {label!r}; expected one of {list(self.labels)}") from None

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)

    def __contains__(self, label) -> bool:
        return label in self.labels


def _outcomes(value) -> OutcomeSet:
    return value if isinstance(value, OutcomeSet) else OutcomeSet(tuple(value))


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """A validated density matrix. Build through :func:`make_density`."""

    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def __repr__(self):
        return f"DensityOperator(dim={self.dim})"


def check_density(matrix, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Validate ``matrix`` as a density operator and return it frozen.

    Raises NotHermitian, NotPSD or TraceNotOne.
    """
    m = linalg.as_matrix(matrix)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"density matrix must be square, got {m.shape}")
    eig = linalg.hermitian_eigenvalues(m, tol)
    tr = float(np.real(np.trace(m)))
    if abs(tr - 1.0) > tol:
        raise TraceNotOne(tr)
    if eig[0] < -tol:
        raise NotPSD(float(eig[0]))
    return m


def make_density(matrix, tol: float = DEFAULT_TOL) -> DensityOperator:
    return DensityOperator(check_density(matrix, tol))


def pure_state(vector, tol: float = DEFAULT_TOL, normalize: bool = False) -> DensityOperator:
    """Projector ``|psi><psi|`` onto a column vector."""
    v = linalg.as_matrix(vector)
    if v.shape[1] != 1:
        raise DimensionMismatch(f"expected a column vector, got shape {v.shape}")
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ValueError("cannot build a pure state from the zero vector")
    if normalize:
        v = linalg.as_matrix(v / norm)
    elif abs(norm - 1.0) > tol:
        raise ValueError(f"state vector has norm {norm:.12g}; pass normalize=True to rescale")
    return make_density(linalg.outer(v, v), tol)


def mix(ensemble: Iterable[tuple[float, DensityOperator]], tol: float = DEFAULT_TOL) -> DensityOperator:
    """Convex combination ``sum p_k rho_k``."""
    items = list(ensemble)
    if not items:
        raise ValueError("empty ensemble")
    probs = [float(p) for p, _ in items]
    if any(p < 0 for p in probs):
        raise ValueError(f"negative weight in ensemble: {probs}")
    if abs(math.fsum(probs) - 1.0) > tol:
        raise ValueError(f"ensemble weights sum to {math.fsum(probs):.12g}, not 1")
    dims = {rho.dim for _, rho in items}
    if len(dims) != 1:
        raise DimensionMismatch(f"ensemble mixes dimensions {sorted(dims)}")
    acc = sum(p * rho.matrix for p, rho in zip(probs, (r for _, r in items)))
    return make_density(acc, tol)


@dataclass(frozen=True, eq=False)
class KrausFamily:
    """Outcome-indexed Kraus operators satisfying completeness within ``tol``."""

    dim: int
    outcomes: OutcomeSet
    blocks: Mapping[str, np.ndarray]
    tol: InitVar[float] = DEFAULT_TOL

    def __post_init__(self, tol):
        outcomes = _outcomes(self.outcomes)
        object.__setattr__(self, "outcomes", outcomes)
        if set(self.blocks) != set(outcomes.labels):
            raise UnknownLabel(
                f"Kraus blocks {sorted(self.blocks)} do not match outcomes {list(outcomes.labels)}"
            )
        blocks = {}
        for x in outcomes:
            k = linalg.as_matrix(self.blocks[x])
            if k.shape != (self.dim, self.dim):
                raise DimensionMismatch(f"Kraus block {x!r} is {k.shape[0]}x{k.shape[1]}, expected {self.dim}x{self.dim}")
            blocks[x] = k
        object.__setattr__(self, "blocks", blocks)
        dev = completeness_deviation(blocks.values(), self.dim)
        if dev > tol:
            raise CompletenessViolation(dev)

    @classmethod
    def from_blocks(cls, blocks: Mapping[str, object] | Sequence[tuple[str, object]], tol: float = DEFAULT_TOL):
        pairs = list(blocks.items()) if isinstance(blocks, Mapping) else list(blocks)
        if not pairs:
            raise ValueError("a Kraus family needs at least one block")
        mats = [(str(x), linalg.as_matrix(k)) for x, k in pairs]
        dim = mats[0][1].shape[1]
        return cls(dim, OutcomeSet(tuple(x for x, _ in mats)), dict(mats), tol)

    def __getitem__(self, label: str) -> np.ndarray:
        if label not in self.blocks:
            self.outcomes.index(label)
        return self.blocks[label]


def completeness_deviation(blocks: Iterable[np.ndarray], dim: int) -> float:
    acc = np.zeros((dim, dim), dtype=np.complex128)
    for k in blocks:
        acc += k.conj().T @ k
    return float(np.max(np.abs(acc - np.eye(dim))))


@dataclass(frozen=True, eq=False)
class IsometryMatrix:
    """``W: H_dim -> H_dim (x) l2(X)`` with outcome-major row blocks."""

    dim: int
    outcomes: OutcomeSet
    matrix: np.ndarray
    tol: InitVar[float] = DEFAULT_TOL

    def __post_init__(self, tol):
        outcomes = _outcomes(self.outcomes)
        object.__setattr__(self, "outcomes", outcomes)
        w = linalg.as_matrix(self.matrix)
        if w.shape != (self.dim * len(outcomes), self.dim):
            raise DimensionMismatch(
                f"isometry for dim {self.dim} and {len(outcomes)} outcomes must be "
                f"{self.dim * len(outcomes)}x{self.dim}, got {w.shape[0]}x{w.shape[1]}"
            )
        object.__setattr__(self, "matrix", w)
        dev = float(np.max(np.abs(w.conj().T @ w - np.eye(self.dim))))
        if dev > tol:
            raise NotIsometric(dev)


@dataclass(frozen=True, eq=False)
class QuantumOperation:
    """A quantum operation, stored as one representative Kraus family."""

    kraus: KrausFamily

    @property
    def dim(self) -> int:
        return self.kraus.dim

    @property
    def outcomes(self) -> OutcomeSet:
        return self.kraus.outcomes

    def block(self, label: str) -> np.ndarray:
        return self.kraus[label]

    def isometry(self) -> IsometryMatrix:
        return kraus_to_isometry(self.kraus)

    @classmethod
    def from_blocks(cls, blocks, tol: float = DEFAULT_TOL) -> "QuantumOperation":
        return cls(KrausFamily.from_blocks(blocks, tol))

    @classmethod
    def from_isometry(cls, w: IsometryMatrix) -> "QuantumOperation":
        return cls(isometry_to_kraus(w))


def embed_outcome(dim: int, outcomes, x: str) -> np.ndarray:
    """Matrix of ``J(x): |psi> -> |psi> (x) |x>`` in the outcome-major layout."""
    outcomes = _outcomes(outcomes)
    i = outcomes.index(x)
    j = np.zeros((dim * len(outcomes), dim), dtype=np.complex128)
    j[i * dim:(i + 1) * dim, :] = np.eye(dim)
    return linalg.as_matrix(j)


def outcome_projector(dim: int, outcomes, x1: str, x2: str | None = None) -> np.ndarray:
    """``1 (x) |x1><x2|`` on ``H_dim (x) l2(X)`` (``x2`` defaults to ``x1``)."""
    outcomes = _outcomes(outcomes)
    e = np.zeros((len(outcomes), len(outcomes)), dtype=np.complex128)
    e[outcomes.index(x1), outcomes.index(x1 if x2 is None else x2)] = 1.0
    return linalg.kron(e, np.eye(dim))


def kraus_to_isometry(k: KrausFamily) -> IsometryMatrix:
    w = np.vstack([k.blocks[x] for x in k.outcomes])
    return IsometryMatrix(k.dim, k.outcomes, w, DEFAULT_TOL)


def isometry_to_kraus(w: IsometryMatrix) -> KrausFamily:
    n = w.dim
    blocks = {x: w.matrix[i * n:(i + 1) * n, :].copy() for i, x in enumerate(w.outcomes)}
    return KrausFamily(n, w.outcomes, blocks, DEFAULT_TOL)


def _clamp_probability(p: float, tol: float) -> float:
    if p < -tol or p > 1.0 + tol:
        raise ProbabilityOutOfRange(f"probability {p!r} outside [-{tol}, 1+{tol}]")
    return min(max(p, 0.0), 1.0)


def _check_dims(op: QuantumOperation, rho: DensityOperator):
    if op.dim != rho.dim:
        raise DimensionMismatch(f"operation acts on dimension {op.dim} but state has dimension {rho.dim}")


def outcome_probability(op: QuantumOperation, x: str, rho: DensityOperator, tol: float = DEFAULT_TOL) -> float:
    """Born rule ``Pr(x|rho) = tr(rho K(x)* K(x))``, clamped to [0, 1]."""
    _check_dims(op, rho)
    return _clamp_probability(linalg.sandwich_trace(op.block(x), rho.matrix), tol)


def isometric_probability(w: IsometryMatrix, x: str, rho: DensityOperator, tol: float = DEFAULT_TOL) -> float:
    """``tr(rho W* (1 (x) |x><x|) W)``, computed from the isometry alone."""
    if w.dim != rho.dim:
        raise DimensionMismatch(f"isometry acts on dimension {w.dim} but state has dimension {rho.dim}")
    proj = outcome_projector(w.dim, w.outcomes, x)
    m = linalg.matmul(linalg.matmul(rho.matrix, linalg.adjoint(w.matrix)), linalg.matmul(proj, w.matrix))
    return _clamp_probability(linalg.trace(m).real, tol)


def apply_effect(
    op: QuantumOperation,
    x: str,
    rho: DensityOperator,
    prob_floor: float = DEFAULT_PROB_FLOOR,
    tol: float = DEFAULT_TOL,
) -> DensityOperator:
    """Post-measurement state ``K(x) rho K(x)* / Pr(x|rho)``."""
    _check_dims(op, rho)
    k = op.block(x)
    p = _clamp_probability(linalg.sandwich_trace(k, rho.matrix), tol)
    if p <= prob_floor:
        raise ZeroProbabilityOutcome(x, p)
    return _effect(k, rho, p, tol)


def _effect(k: np.ndarray, rho: DensityOperator, p: float, tol: float) -> DensityOperator:
    m = np.asarray(linalg.sandwich(k, rho.matrix)) / p
    # remove rounding asymmetry before validation
    m = (m + m.conj().T) / 2
    return make_density(m, tol)


def outcome_distribution(op: QuantumOperation, rho: DensityOperator, tol: float = DEFAULT_TOL) -> dict[str, float]:
    _check_dims(op, rho)
    dist = {x: outcome_probability(op, x, rho, tol) for x in op.outcomes}
    total = math.fsum(dist.values())
    if abs(total - 1.0) > tol:
        raise ProbabilityOutOfRange(f"outcome probabilities sum to {total:.12g}")
    return dist


def unitary_as_operation(u, tol: float = DEFAULT_TOL, label: str = UNITARY_LABEL) -> QuantumOperation:
    u = linalg.as_matrix(u)
    if u.shape[0] != u.shape[1]:
        raise DimensionMismatch(f"unitary must be square, got {u.shape}")
    dev = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
    if dev > tol:
        raise NotUnitary(dev)
    return QuantumOperation(KrausFamily(u.shape[0], OutcomeSet((label,)), {label: u}, tol))


def _block_phase(ka: np.ndarray, kb: np.ndarray, tol: float) -> float | None:
    """Phase ``theta`` with ``kb ~ e^{i theta} ka`` or None if there is none."""
    amax = float(np.max(np.abs(ka)))
    bmax = float(np.max(np.abs(kb)))
    if amax <= tol and bmax <= tol:
        return 0.0
    if amax <= tol:
        return None
    idx = np.unravel_index(int(np.argmax(np.abs(ka))), ka.shape)
    theta = cmath.phase(kb[idx] / ka[idx]) % (2 * math.pi)
    if theta >= 2 * math.pi:
        theta = 0.0
    if float(np.max(np.abs(kb - cmath.exp(1j * theta) * ka))) > tol:
        return None
    return theta


def _check_comparable(a: QuantumOperation, b: QuantumOperation):
    if a.dim != b.dim:
        raise DimensionMismatch(f"operations act on dimensions {a.dim} and {b.dim}")
    if a.outcomes != b.outcomes:
        raise UnknownLabel(f"outcome sets differ: {list(a.outcomes)} vs {list(b.outcomes)}")


def phase_equivalent(a: QuantumOperation, b: QuantumOperation, tol: float = DEFAULT_TOL) -> dict[str, float] | None:
    """Decide whether ``b``'s blocks are outcome-wise phase multiples of ``a``'s.

    Returns the phase map ``x -> theta(x)`` in ``[0, 2pi)`` or None. Blocks that
    are zero in both operations get ``theta = 0``.
    """
    _check_comparable(a, b)
    thetas = {}
    for x in a.outcomes:
        theta = _block_phase(a.block(x), b.block(x), tol)
        if theta is None:
            return None
        thetas[x] = theta
    return thetas


def inequivalence_witness(a: QuantumOperation, b: QuantumOperation, tol: float = DEFAULT_TOL) -> str | None:
    """First outcome whose blocks are not related by a phase, if any."""
    _check_comparable(a, b)
    for x in a.outcomes:
        if _block_phase(a.block(x), b.block(x), tol) is None:
            return x
    return None


def apply_phases(op: QuantumOperation, thetas: Mapping[str, float]) -> QuantumOperation:
    """Representative ``Theta W`` with ``Theta = 1 (x) sum e^{i theta(x)} |x><x|``."""
    blocks = {x: cmath.exp(1j * thetas.get(x, 0.0)) * op.block(x) for x in op.outcomes}
    return QuantumOperation(KrausFamily(op.dim, op.outcomes, blocks))
