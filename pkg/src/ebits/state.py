"""Dense pure-state algebra over small qubit registers.

Basis indices are big-endian: qubit 0 is the most significant bit, so
``|q0 q1 ... q_{n-1}>`` has index ``q0 * 2**(n-1) + ... + q_{n-1}``.
Spin up is ``|0>`` and spin down is ``|1>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

MAX_QUBITS = 26
NORM_TOL = 1e-6
OWNERS = ("Alice", "Bob", "ancilla")


@dataclass(frozen=True)
class QubitLabel:
    owner: str = "ancilla"
    role: str = ""

    def __post_init__(self):
        if self.owner not in OWNERS:
            raise ValueError(f"unknown owner {self.owner!r}; expected one of {OWNERS}")


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized amplitudes plus one label per qubit.

    Build instances with :func:`make_state`; the constructor only validates.
    """

    amps: np.ndarray
    labels: tuple[QubitLabel, ...]

    def __post_init__(self):
        n = len(self.labels)
        if n < 1 or n > MAX_QUBITS:
            raise ValueError(f"register size {n} outside [1, {MAX_QUBITS}]")
        if self.amps.shape != (2**n,):
            raise ValueError(f"expected {2**n} amplitudes for {n} qubits, got shape {self.amps.shape}")
        if not np.isfinite(self.amps.sum()):
            raise ValueError("amplitudes must be finite")
        self.amps.setflags(write=False)

    @property
    def num_qubits(self) -> int:
        return len(self.labels)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def qubits_of(self, owner: str) -> tuple[int, ...]:
        return tuple(i for i, lab in enumerate(self.labels) if lab.owner == owner)

    def as_tensor(self) -> np.ndarray:
        return self.amps.reshape((2,) * self.num_qubits)

    def __repr__(self):
        return f"StateVector(num_qubits={self.num_qubits}, owners={[l.owner for l in self.labels]})"


def _coerce_labels(num_qubits, labels):
    if labels is None:
        return tuple(QubitLabel() for _ in range(num_qubits))
    out = []
    for lab in labels:
        if isinstance(lab, QubitLabel):
            out.append(lab)
        elif isinstance(lab, str):
            out.append(QubitLabel(lab))
        else:
            out.append(QubitLabel(*lab))
    if len(out) != num_qubits:
        raise ValueError(f"{len(out)} labels given for {num_qubits} qubits")
    return tuple(out)


def make_state(num_qubits: int, amps, labels=None, *, normalize: bool = False) -> StateVector:
    """Build a validated state.

    Inputs whose norm is within ``NORM_TOL`` of 1 are renormalized silently;
    anything else is rejected unless ``normalize=True``, which accepts any
    nonzero vector and scales it to unit norm.

    ``labels`` entries may be :class:`QubitLabel`, an owner string, or an
    ``(owner, role)`` tuple; omitted labels default to ancilla.
    """
    arr = np.array(amps, dtype=np.complex128).reshape(-1)
    if num_qubits < 1 or num_qubits > MAX_QUBITS:
        raise ValueError(f"num_qubits must be in [1, {MAX_QUBITS}], got {num_qubits}")
    if arr.size != 2**num_qubits:
        raise ValueError(f"expected {2**num_qubits} amplitudes, got {arr.size}")
    if not np.isfinite(arr).all():
        raise ValueError("amplitudes must be finite")
    norm = math.sqrt(np.vdot(arr, arr).real)
    if norm == 0.0:
        raise ValueError("zero-norm amplitude vector")
    if not normalize and abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"norm {norm:.6g} deviates from 1 by more than {NORM_TOL}")
    return StateVector(arr / norm, _coerce_labels(num_qubits, labels))


def basis_state(bits: str, labels=None) -> StateVector:
    """``basis_state("01")`` is ``|up, down>``."""
    n = len(bits)
    amps = np.zeros(2**n, dtype=np.complex128)
    amps[int(bits, 2)] = 1.0
    return make_state(n, amps, labels)


def tensor(left: StateVector, right: StateVector) -> StateVector:
    return StateVector(np.multiply.outer(left.amps, right.amps).ravel(), left.labels + right.labels)


def relabel(state: StateVector, labels) -> StateVector:
    return StateVector(state.amps.copy(), _coerce_labels(state.num_qubits, labels))


def _perm(qubits, n):
    m = len(qubits)
    if len(set(qubits)) != m or any(q < 0 or q >= n for q in qubits):
        raise ValueError(f"invalid target qubits {qubits} for a {n}-qubit register")
    perm = list(qubits) + [q for q in range(n) if q not in qubits]
    inv = [0] * n
    for i, q in enumerate(perm):
        inv[q] = i
    return perm, inv


def apply_operator(state: StateVector, qubits: Sequence[int], op: np.ndarray) -> np.ndarray:
    """Return raw (unnormalized) amplitudes of ``op`` acting on ``qubits``.

    ``op`` is a ``2**m x 2**m`` matrix in the big-endian order of ``qubits``,
    or a length ``2**m`` vector meaning a diagonal operator.
    """
    n, m = state.num_qubits, len(qubits)
    perm, inv = _perm(tuple(qubits), n)
    psi = state.as_tensor().transpose(perm).reshape(2**m, -1)
    op = np.asarray(op)
    out = op[:, None] * psi if op.ndim == 1 else op @ psi
    return out.reshape((2,) * n).transpose(inv).reshape(-1)


@dataclass(frozen=True, eq=False)
class LocalUnitary:
    qubit: int
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.complex128)
        if mat.shape != (2, 2):
            raise ValueError("local unitary must be 2x2")
        if not np.allclose(mat.conj().T @ mat, np.eye(2), atol=1e-10, rtol=0):
            raise ValueError("matrix is not unitary")
        object.__setattr__(self, "matrix", mat)


def apply_local(state: StateVector, u: LocalUnitary) -> StateVector:
    if not 0 <= u.qubit < state.num_qubits:
        raise IndexError(f"qubit {u.qubit} out of range for {state.num_qubits} qubits")
    return StateVector(apply_operator(state, (u.qubit,), u.matrix), state.labels)


def fidelity(a: StateVector, b: StateVector) -> float:
    """Phase-insensitive overlap ``|<a|b>|``."""
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits")
    return float(abs(np.vdot(a.amps, b.amps)))


# Spin-pi rotations exp(-i pi sigma / 2) = -i sigma.
PAULI = {
    "none": np.eye(2, dtype=np.complex128),
    "x": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def pi_rotation(axis: str) -> np.ndarray:
    if axis == "none":
        return PAULI["none"]
    return -1j * PAULI[axis]


def random_state(num_qubits: int, rng: np.random.Generator, labels=None) -> StateVector:
    """Haar-random pure state."""
    z = rng.normal(size=2**num_qubits) + 1j * rng.normal(size=2**num_qubits)
    return make_state(num_qubits, z, labels, normalize=True)


def random_unitary(rng: np.random.Generator) -> np.ndarray:
    """Haar-random 2x2 unitary via QR with phase fix."""
    z = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


# ---------------------------------------------------------------------------
# Projective measurement


@dataclass(frozen=True)
class MeasurementRecord:
    outcome: int
    probability: float
    post_state: StateVector


@dataclass(frozen=True, eq=False)
class ProjectorSet:
    """Complete set of orthogonal projectors acting on ``qubits``.

    Each projector is either a dense ``2**m x 2**m`` matrix or a 0/1 vector
    giving a diagonal projector; mixing the two is not allowed. Validation
    happens once here, so a set can be reused across many measurements.
    """

    qubits: tuple[int, ...]
    projectors: tuple[np.ndarray, ...]
    tol: float = 1e-8
    diagonal: bool = field(init=False)
    stacked: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        projs = tuple(np.asarray(p, dtype=np.complex128) for p in self.projectors)
        object.__setattr__(self, "projectors", projs)
        object.__setattr__(self, "stacked", np.array(projs) if projs else None)
        dim = 2 ** len(self.qubits)
        if not projs:
            raise ValueError("empty projector set")
        ndims = {p.ndim for p in projs}
        if len(ndims) != 1 or ndims.pop() not in (1, 2):
            raise ValueError("projectors must be all dense matrices or all diagonals")
        diagonal = projs[0].ndim == 1
        object.__setattr__(self, "diagonal", diagonal)
        if diagonal:
            stack = np.array(projs)
            if stack.shape[1] != dim:
                raise ValueError(f"diagonal projectors must have length {dim}")
            if np.max(np.abs(stack * stack - stack)) > self.tol:
                raise ValueError("diagonal projector entries must be 0 or 1")
            if np.max(np.abs(stack.sum(axis=0) - 1.0)) > self.tol:
                raise ValueError("projectors are not complete")
            return
        for p in projs:
            if p.shape != (dim, dim):
                raise ValueError(f"projectors must be {dim}x{dim}")
            if np.max(np.abs(p @ p - p)) > self.tol or np.max(np.abs(p - p.conj().T)) > self.tol:
                raise ValueError("operator is not an orthogonal projector")
        for i, p in enumerate(projs):
            for q in projs[i + 1 :]:
                if np.max(np.abs(p @ q)) > self.tol:
                    raise ValueError("projectors are not mutually orthogonal")
        if np.max(np.abs(sum(projs) - np.eye(dim))) > self.tol:
            raise ValueError("projectors are not complete")

    @classmethod
    def from_vectors(cls, qubits, vectors) -> "ProjectorSet":
        """Rank-one projectors onto the given (normalized) vectors."""
        projs = []
        for v in vectors:
            v = np.asarray(v.amps if isinstance(v, StateVector) else v, dtype=np.complex128)
            projs.append(np.outer(v, v.conj()))
        return cls(tuple(qubits), tuple(projs))

    @classmethod
    def computational(cls, qubit: int) -> "ProjectorSet":
        return cls((qubit,), (np.array([1.0, 0.0]), np.array([0.0, 1.0])))

    def __len__(self):
        return len(self.projectors)


def _branch(state: StateVector, pset: ProjectorSet, outcome: int):
    raw = apply_operator(state, pset.qubits, pset.projectors[outcome])
    return float(np.vdot(raw, raw).real), raw


def _probabilities(state: StateVector, pset: ProjectorSet):
    """Born probabilities, plus the projected tensors for dense sets."""
    m = len(pset.qubits)
    perm, _ = _perm(pset.qubits, state.num_qubits)
    psi = state.as_tensor().transpose(perm).reshape(2**m, -1)
    if pset.diagonal:
        marg = np.einsum("ij,ij->i", psi, psi.conj()).real
        return pset.stacked.real @ marg, None
    branches = pset.stacked @ psi
    return np.einsum("kij,kij->k", branches, branches.conj()).real, branches


def outcome_probabilities(state: StateVector, pset: ProjectorSet) -> np.ndarray:
    """Born probabilities of every outcome."""
    return _probabilities(state, pset)[0]


def project(state: StateVector, pset: ProjectorSet, outcome: int) -> MeasurementRecord:
    """Force ``outcome``: return its probability and renormalized post-state."""
    prob, raw = _branch(state, pset, outcome)
    if prob <= 0.0:
        raise ValueError(f"outcome {outcome} has zero probability")
    return MeasurementRecord(outcome, min(prob, 1.0), StateVector(raw / np.sqrt(prob), state.labels))


def measure_projectors(state: StateVector, pset: ProjectorSet, rng: np.random.Generator) -> MeasurementRecord:
    """Sample an outcome with its Born probability and collapse the state."""
    probs, branches = _probabilities(state, pset)
    cdf = np.cumsum(probs)
    u = rng.random() * cdf[-1]
    outcome = min(int(np.searchsorted(cdf, u, side="right")), len(probs) - 1)
    while probs[outcome] <= 0.0:
        outcome -= 1
    if branches is None:
        return project(state, pset, outcome)
    prob = float(probs[outcome])
    n = state.num_qubits
    _, inv = _perm(pset.qubits, n)
    raw = branches[outcome].reshape((2,) * n).transpose(inv).reshape(-1)
    return MeasurementRecord(outcome, min(prob, 1.0), StateVector(raw / math.sqrt(prob), state.labels))
