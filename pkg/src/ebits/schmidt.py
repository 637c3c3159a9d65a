"""Schmidt spectra and entropy of entanglement for bipartite pure states."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .state import StateVector

CLAMP_TOL = 1e-12
SUM_TOL = 1e-9


@dataclass(frozen=True)
class Bipartition:
    side_a: frozenset[int]
    side_b: frozenset[int]

    def __init__(self, side_a: Iterable[int], side_b: Iterable[int]):
        object.__setattr__(self, "side_a", frozenset(side_a))
        object.__setattr__(self, "side_b", frozenset(side_b))

    @classmethod
    def by_owner(cls, state: StateVector, owner: str = "Alice") -> "Bipartition":
        a = state.qubits_of(owner)
        return cls(a, set(range(state.num_qubits)) - set(a))

    def validate(self, num_qubits: int):
        if not self.side_a or not self.side_b:
            raise ValueError("both sides of a bipartition must be non-empty")
        if self.side_a & self.side_b:
            raise ValueError("bipartition sides overlap")
        if self.side_a | self.side_b != set(range(num_qubits)):
            raise ValueError(f"bipartition does not cover qubits 0..{num_qubits - 1}")


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Squared Schmidt coefficients, sorted descending."""

    weights: tuple[float, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.size == 0 or np.any(w < 0) or np.any(w > 1 + SUM_TOL):
            raise ValueError("Schmidt weights must lie in [0, 1]")
        if abs(w.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"Schmidt weights sum to {w.sum():.12g}, not 1")
        if np.any(np.diff(w) > 0):
            raise ValueError("Schmidt weights must be sorted descending")

    @property
    def rank(self) -> int:
        return sum(1 for w in self.weights if w > CLAMP_TOL)


def coefficient_matrix(state: StateVector, cut: Bipartition) -> np.ndarray:
    """Amplitudes reshaped to ``dim(A) x dim(B)`` along the cut."""
    cut.validate(state.num_qubits)
    a, b = sorted(cut.side_a), sorted(cut.side_b)
    psi = np.transpose(state.as_tensor(), a + b)
    return psi.reshape(2 ** len(a), 2 ** len(b))


def reduced_density(state: StateVector, qubits: Iterable[int]) -> np.ndarray:
    """Reduced density operator on ``qubits`` (others traced out)."""
    keep = sorted(set(qubits))
    rest = sorted(set(range(state.num_qubits)) - set(keep))
    if not rest:
        return np.outer(state.amps, state.amps.conj())
    m = coefficient_matrix(state, Bipartition(keep, rest))
    return m @ m.conj().T


def schmidt_spectrum(state: StateVector, cut: Bipartition) -> SchmidtSpectrum:
    """Squared singular values of the coefficient matrix across ``cut``.

    Values in ``(-CLAMP_TOL, 0)`` from round-off are clamped to zero and the
    spectrum renormalized.
    """
    s = np.linalg.svd(coefficient_matrix(state, cut), compute_uv=False)
    w = s**2
    if np.any(w < -CLAMP_TOL):
        raise ArithmeticError("negative Schmidt weight beyond round-off")
    w = np.clip(w, 0.0, None)
    w = np.sort(w / w.sum())[::-1]
    return SchmidtSpectrum(tuple(float(x) for x in w))


def shannon_entropy(weights) -> float:
    """Base-2 Shannon entropy with ``0 log 0 = 0``."""
    w = np.asarray(weights, dtype=float)
    w = w[w > 0]
    return float(max(0.0, -np.sum(w * np.log2(w))))


def entropy_of_entanglement(spectrum: SchmidtSpectrum) -> float:
    return shannon_entropy(spectrum.weights)


def entanglement_of(state: StateVector, cut: Bipartition | None = None) -> float:
    """Entropy of entanglement across ``cut`` (default: Alice vs everyone else)."""
    if cut is None:
        cut = Bipartition.by_owner(state)
    return entropy_of_entanglement(schmidt_spectrum(state, cut))


def binary_entropy(p: float) -> float:
    """``-p log2 p - (1-p) log2 (1-p)``; the entanglement of a two-term pair."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)
