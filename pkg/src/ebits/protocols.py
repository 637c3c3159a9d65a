"""Teleportation, singlet one-time-pad keying, and single-pair local filtering."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .schmidt import binary_entropy, entanglement_of
from .state import (
    LocalUnitary,
    ProjectorSet,
    QubitLabel,
    StateVector,
    apply_local,
    apply_operator,
    make_state,
    measure_projectors,
    outcome_probabilities,
    pi_rotation,
    project,
    tensor,
)

SQRT_HALF = 1 / math.sqrt(2)


@dataclass(frozen=True)
class PairSpec:
    """Pair ``sqrt(p)|up up> + sqrt(1-p)|down down>``; ``p`` is alpha squared."""

    p: float

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"p must be in (0, 1], got {self.p}")

    @property
    def alpha(self) -> float:
        return math.sqrt(self.p)

    @property
    def entropy(self) -> float:
        return binary_entropy(self.p)


def make_psi_alpha(spec: PairSpec) -> StateVector:
    return make_state(
        2,
        [math.sqrt(spec.p), 0.0, 0.0, math.sqrt(1.0 - spec.p)],
        [QubitLabel("Alice"), QubitLabel("Bob")],
    )


# ---------------------------------------------------------------------------
# Bell basis and teleportation

BELL_NAMES = ("Psi+", "Psi-", "Phi+", "Phi-")
BELL_BITS = {"Psi+": (0, 0), "Psi-": (0, 1), "Phi+": (1, 0), "Phi-": (1, 1)}
# Alice's rotation for each of Bob's outcomes with register order (K, A, B).
CORRECTIONS = {"Psi+": "z", "Psi-": "none", "Phi+": "y", "Phi-": "x"}

_BELL_AMPS = {
    "Psi+": np.array([0, 1, 1, 0]) * SQRT_HALF,
    "Psi-": np.array([0, 1, -1, 0]) * SQRT_HALF,
    "Phi+": np.array([1, 0, 0, 1]) * SQRT_HALF,
    "Phi-": np.array([1, 0, 0, -1]) * SQRT_HALF,
}


def bell_basis(labels=None) -> tuple[StateVector, ...]:
    """Psi+, Psi-, Phi+, Phi- in that order."""
    return tuple(make_state(2, _BELL_AMPS[name], labels) for name in BELL_NAMES)


def singlet(labels=(("Alice",), ("Bob",))) -> StateVector:
    return make_state(2, _BELL_AMPS["Psi-"], labels)


@dataclass(frozen=True)
class QubitState:
    a: complex
    b: complex

    def __post_init__(self):
        if abs(abs(self.a) ** 2 + abs(self.b) ** 2 - 1.0) > 1e-10:
            raise ValueError("|a|^2 + |b|^2 must equal 1")

    @classmethod
    def random(cls, rng: np.random.Generator) -> "QubitState":
        x = rng.normal(size=4)
        r = math.sqrt(float(x @ x))
        return cls(complex(x[0], x[1]) / r, complex(x[2], x[3]) / r)

    def as_state(self, owner: str = "ancilla", role: str = "") -> StateVector:
        return make_state(1, [self.a, self.b], [QubitLabel(owner, role)])


@dataclass(frozen=True)
class TeleportTranscript:
    outcome: str
    classical_bits: tuple[int, int]
    correction: str
    probability: float
    alice_final: StateVector
    bob_state: StateVector


def _bell_measurement():
    # Kirk is qubit 0, Bob's half of the singlet is qubit 2.
    return ProjectorSet.from_vectors((0, 2), [_BELL_AMPS[n] for n in BELL_NAMES])


_BELL_PSET = _bell_measurement()
_SINGLET = singlet()
_ALICE = (QubitLabel("Alice"),)
_BOB_PAIR = (QubitLabel("Bob", "Kirk"), QubitLabel("Bob"))
_CORRECTION_OPS = {name: LocalUnitary(0, pi_rotation(axis)) for name, axis in CORRECTIONS.items()}


def teleport_register(state: QubitState) -> StateVector:
    """Kirk's spin joined to an Alice-Bob singlet, qubit order (K, A, B)."""
    kirk = state.as_state("Bob", "Kirk")
    return tensor(kirk, _SINGLET)


def teleport(state: QubitState, rng: np.random.Generator | None = None, outcome: str | None = None) -> TeleportTranscript:
    """Teleport ``state`` from Bob's station to Alice's spin.

    With ``outcome`` given the Bell measurement is forced to that result
    instead of sampled.
    """
    register = teleport_register(state)
    if outcome is None:
        if rng is None:
            raise ValueError("rng is required unless outcome is forced")
        rec = measure_projectors(register, _BELL_PSET, rng)
    else:
        rec = project(register, _BELL_PSET, BELL_NAMES.index(outcome))
    name = BELL_NAMES[rec.outcome]

    # After the measurement the register factorizes as Bell(K,B) x Alice.
    bell = _BELL_AMPS[name].reshape(2, 2)
    psi = rec.post_state.as_tensor()
    alice = np.einsum("kab,kb->a", psi, bell.conj())
    alice_state = make_state(1, alice, _ALICE)

    final = apply_local(alice_state, _CORRECTION_OPS[name])
    bob = StateVector(_BELL_AMPS[name].astype(np.complex128), _BOB_PAIR)
    return TeleportTranscript(name, BELL_BITS[name], CORRECTIONS[name], rec.probability, final, bob)


# ---------------------------------------------------------------------------
# One-time pad from shared pairs

Convention = Literal["spin-flip", "photon-same"]


def otp_pair_state(convention: Convention = "spin-flip") -> StateVector:
    """Source state for keying: spin singlets, or polarization-correlated photons."""
    labels = [QubitLabel("Alice"), QubitLabel("Bob")]
    if convention == "spin-flip":
        return make_state(2, _BELL_AMPS["Psi-"], labels)
    if convention == "photon-same":
        return make_state(2, _BELL_AMPS["Phi+"], labels)
    raise ValueError(f"unknown convention {convention!r}")


_ZZ = ProjectorSet((0, 1), tuple(np.eye(4)))


def raw_key_bits(n_pairs: int, convention: Convention, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Both parties' z outcomes (0 = up), before any complementing."""
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    probs = outcome_probabilities(otp_pair_state(convention), _ZZ)
    joint = np.searchsorted(np.cumsum(probs), rng.random(n_pairs) * probs.sum(), side="right")
    joint = np.minimum(joint, 3)
    return (joint >> 1).astype(np.uint8), (joint & 1).astype(np.uint8)


def otp_keygen(n_pairs: int, convention: Convention = "spin-flip", rng: np.random.Generator | None = None):
    """Shared random key from ``n_pairs`` measured pairs.

    Under ``spin-flip`` Bob complements his bits, since singlet spins come out
    opposite.
    """
    if rng is None:
        raise ValueError("rng is required")
    alice, bob = raw_key_bits(n_pairs, convention, rng)
    if convention == "spin-flip":
        bob = 1 - bob
    return alice, bob.astype(np.uint8)


def to_bits(bits) -> np.ndarray:
    if isinstance(bits, str):
        if set(bits) - {"0", "1"}:
            raise ValueError("bit strings may only contain 0 and 1")
        return np.frombuffer(bits.encode(), dtype=np.uint8) - ord("0")
    arr = np.asarray(bits, dtype=np.uint8)
    if np.any(arr > 1):
        raise ValueError("bits must be 0 or 1")
    return arr


def bits_to_str(bits) -> str:
    return "".join(str(int(b)) for b in bits)


def otp_encrypt(message_bits, key_bits) -> np.ndarray:
    m, k = to_bits(message_bits), to_bits(key_bits)
    if m.shape != k.shape:
        raise ValueError(f"message has {m.size} bits but key has {k.size}")
    return m ^ k


def otp_decrypt(cipher_bits, key_bits) -> np.ndarray:
    # addition and subtraction coincide mod 2
    return otp_encrypt(cipher_bits, key_bits)


# ---------------------------------------------------------------------------
# Local filtering


@dataclass(frozen=True)
class FilterSpec:
    """Filter passing ``|up>`` with amplitude ``x`` and absorbing with ``y``."""

    x: float
    y: float

    def __post_init__(self):
        if not 0.0 <= self.x <= 1.0:
            raise ValueError(f"filter amplitude x={self.x} outside [0, 1]")
        if abs(self.x**2 + self.y**2 - 1.0) > 1e-10:
            raise ValueError("x^2 + y^2 must equal 1")

    @classmethod
    def from_x(cls, x: float) -> "FilterSpec":
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"filter amplitude x={x} outside [0, 1]")
        return cls(x, math.sqrt(1.0 - x * x))

    @classmethod
    def canonical(cls, spec: PairSpec) -> "FilterSpec":
        """The filter that turns a successful pass into an exact ebit."""
        x = math.sqrt((1.0 - spec.p) / spec.p)
        if x > 1.0 + 1e-12:
            raise ValueError(f"no canonical filter for p={spec.p} < 1/2")
        return cls.from_x(min(x, 1.0))

    def kraus(self) -> tuple[np.ndarray, np.ndarray]:
        """Diagonal (pass, absorb) operators on Alice's spin."""
        return np.array([self.x, 1.0]), np.array([self.y, 0.0])


@dataclass(frozen=True)
class FilterOutcome:
    passed: bool
    probability: float
    post_state: StateVector

    @property
    def absorbed(self) -> bool:
        return not self.passed


@dataclass(frozen=True)
class FilterBranches:
    pass_prob: float
    passed: StateVector
    absorb_prob: float
    absorbed: StateVector | None

    def expected_entanglement(self) -> float:
        e = self.pass_prob * entanglement_of(self.passed)
        if self.absorbed is not None:
            e += self.absorb_prob * entanglement_of(self.absorbed)
        return e


def filter_branches(spec: PairSpec, filt: FilterSpec | None = None) -> FilterBranches:
    """Both outcomes of Alice's filter with exact probabilities."""
    filt = FilterSpec.canonical(spec) if filt is None else filt
    pair = make_psi_alpha(spec)
    k_pass, k_abs = filt.kraus()
    raw_pass = apply_operator(pair, (0,), k_pass)
    raw_abs = apply_operator(pair, (0,), k_abs)
    p_pass = float(np.vdot(raw_pass, raw_pass).real)
    p_abs = float(np.vdot(raw_abs, raw_abs).real)
    passed = StateVector(raw_pass / math.sqrt(p_pass), pair.labels)
    absorbed = StateVector(raw_abs / math.sqrt(p_abs), pair.labels) if p_abs > 0 else None
    return FilterBranches(p_pass, passed, p_abs, absorbed)


def local_filter(spec: PairSpec, filt: FilterSpec | None = None, rng: np.random.Generator | None = None) -> FilterOutcome:
    """One run of the filter: passes when a uniform draw falls below the pass probability."""
    if rng is None:
        raise ValueError("rng is required")
    br = filter_branches(spec, filt)
    if rng.random() < br.pass_prob:
        return FilterOutcome(True, br.pass_prob, br.passed)
    return FilterOutcome(False, br.absorb_prob, br.absorbed)


def filter_pass_count(spec: PairSpec, filt: FilterSpec | None, n: int, rng: np.random.Generator) -> int:
    """Number of passes in ``n`` runs; consumes the stream exactly like ``n`` calls to :func:`local_filter`."""
    br = filter_branches(spec, filt)
    return int(np.count_nonzero(rng.random(n) < br.pass_prob))
