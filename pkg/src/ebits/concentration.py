"""Collective entanglement concentration on ``k`` copies of a partially entangled pair.

Two routes compute the same quantities. The explicit route builds the
``2k``-qubit state and measures it (``k <= 13``); the combinatorial route
works with binomial term counts in log space and has no size limit. The
explicit route is the reference for the combinatorial one.

Outcome ``j`` always means the number of pairs found spin-down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np

from .protocols import PairSpec, make_psi_alpha
from .schmidt import Bipartition
from .state import (
    MeasurementRecord,
    ProjectorSet,
    QubitLabel,
    StateVector,
    make_state,
    measure_projectors,
    outcome_probabilities,
    project,
    tensor,
)

MAX_EXPLICIT_PAIRS = 13
EXACT_LOG2_LIMIT = 60
BIGINT_BITS = 512

TrimPolicy = Literal["discard", "recursive"]


@dataclass(frozen=True)
class EnsembleSpec:
    k: int
    pair: PairSpec

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")

    @classmethod
    def of(cls, k: int, p: float) -> "EnsembleSpec":
        return cls(k, PairSpec(p))

    @property
    def p(self) -> float:
        return self.pair.p


# ---------------------------------------------------------------------------
# Explicit state-vector route


def ensemble_state(spec: EnsembleSpec) -> StateVector:
    """``k`` copies of the pair; pair ``i`` sits on qubits ``2i`` (Alice) and ``2i+1`` (Bob)."""
    if spec.k > MAX_EXPLICIT_PAIRS:
        raise ValueError(f"explicit route supports k <= {MAX_EXPLICIT_PAIRS}, got {spec.k}")
    pair = make_psi_alpha(spec.pair)
    state = pair
    for _ in range(spec.k - 1):
        state = tensor(state, pair)
    roles = [QubitLabel(lab.owner, f"pair{i // 2}") for i, lab in enumerate(state.labels)]
    return StateVector(state.amps.copy(), tuple(roles))


def total_z_projectors(k: int) -> ProjectorSet:
    """Diagonal projectors onto Alice's subspaces with ``j`` spins down, on qubits 0, 2, ..."""
    down = np.array([bin(i).count("1") for i in range(2**k)])
    return ProjectorSet(tuple(range(0, 2 * k, 2)), tuple((down == j).astype(float) for j in range(k + 1)))


def pair_cut(k: int) -> Bipartition:
    return Bipartition(range(0, 2 * k, 2), range(1, 2 * k, 2))


def collective_z_measure(spec: EnsembleSpec, rng: np.random.Generator) -> MeasurementRecord:
    """Alice measures the z component of her total spin; the outcome label is ``j``."""
    return measure_projectors(ensemble_state(spec), total_z_projectors(spec.k), rng)


def collective_z_branches(spec: EnsembleSpec) -> list[MeasurementRecord]:
    """Every outcome of the collective measurement, with Born probability and post-state."""
    state = ensemble_state(spec)
    pset = total_z_projectors(spec.k)
    probs = outcome_probabilities(state, pset)
    return [project(state, pset, j) for j in range(spec.k + 1) if probs[j] > 0]


def explicit_outcome_probabilities(spec: EnsembleSpec) -> np.ndarray:
    return outcome_probabilities(ensemble_state(spec), total_z_projectors(spec.k))


def sample_collective_z(spec: EnsembleSpec, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Outcome counts of ``trials`` independent collective measurements.

    Uses the explicit Born probabilities and consumes ``rng`` exactly as
    ``trials`` successive calls to :func:`collective_z_measure` would.
    """
    probs = explicit_outcome_probabilities(spec)
    cdf = np.cumsum(probs)
    idx = np.searchsorted(cdf, rng.random(trials) * cdf[-1], side="right")
    idx = np.minimum(idx, spec.k)
    return np.bincount(idx, minlength=spec.k + 1)


# ---------------------------------------------------------------------------
# Combinatorial route


@dataclass(frozen=True)
class OutcomeEntry:
    j: int
    probability: float
    term_count: int
    log2_terms: float


@dataclass(frozen=True)
class OutcomeDistribution:
    spec: EnsembleSpec
    entries: tuple[OutcomeEntry, ...]

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([e.probability for e in self.entries])

    @property
    def log2_terms(self) -> np.ndarray:
        return np.array([e.log2_terms for e in self.entries])

    @property
    def term_counts(self) -> list[int]:
        return [e.term_count for e in self.entries]


def _log_pmf(k: int, j: int, p: float) -> float:
    """Natural log of ``C(k,j) p^(k-j) (1-p)^j``, ``-inf`` for impossible outcomes."""
    if p == 1.0:
        return 0.0 if j == 0 else -math.inf
    log_c = math.lgamma(k + 1) - math.lgamma(j + 1) - math.lgamma(k - j + 1)
    return log_c + (k - j) * math.log(p) + j * math.log1p(-p)


def _comb(k: int, j: int) -> int:
    # math.comb is quadratic for large k on older interpreters
    j = min(j, k - j)
    c = 1
    for i in range(1, j + 1):
        c = c * (k - j + i) // i
    return c


def log2_binomial(k: int, j: int) -> float:
    if k <= EXACT_LOG2_LIMIT:
        return math.log2(math.comb(k, j))
    return (math.lgamma(k + 1) - math.lgamma(j + 1) - math.lgamma(k - j + 1)) / math.log(2)


def outcome_distribution(spec: EnsembleSpec) -> OutcomeDistribution:
    k, p = spec.k, spec.p
    entries = []
    count = 1
    for j in range(k + 1):
        if j:
            count = count * (k - j + 1) // j
        if k <= EXACT_LOG2_LIMIT:
            prob = count * p ** (k - j) * (1.0 - p) ** j
        else:
            prob = math.exp(_log_pmf(k, j, p))
        entries.append(OutcomeEntry(j, prob, count, log2_binomial(k, j)))
    return OutcomeDistribution(spec, tuple(entries))


def exact_entropy_rate(spec: EnsembleSpec) -> float:
    """Expected entanglement after one collective measurement, per input pair."""
    dist = outcome_distribution(spec)
    return math.fsum(e.probability * e.log2_terms for e in dist.entries) / spec.k


def rate_gap_bound(k: int) -> float:
    return (math.log2(k) + 2) / (2 * k)


# ---------------------------------------------------------------------------
# Batching equal-coefficient superpositions into ebits


@dataclass(frozen=True)
class BatchPlan:
    """Product of term counts and the power of two it is trimmed to.

    ``accumulated_terms`` is ``None`` once the product exceeds ``2**512``;
    from there only ``log2_terms`` is tracked and ``exact`` is False.
    """

    accumulated_terms: int | None
    log2_terms: float
    target_power: int
    trim_success_prob: float
    exact: bool = True

    @property
    def trim_success_fraction(self) -> Fraction:
        if not self.exact:
            raise ValueError("trim probability is not exact above 2**512 terms")
        return Fraction(2**self.target_power, self.accumulated_terms)


def batch_terms(term_counts: Sequence[int]) -> BatchPlan:
    counts = list(term_counts)
    if not counts:
        raise ValueError("no term counts to batch")
    total: int | None = 1
    log2_total = 0.0
    for c in counts:
        if int(c) != c or c < 1:
            raise ValueError(f"term counts must be positive integers, got {c}")
        c = int(c)
        if total is not None:
            total *= c
            if total > 2**BIGINT_BITS:
                log2_total = math.log2(total)
                total = None
        else:
            log2_total += math.log2(c)
    if total is not None:
        n = total.bit_length() - 1
        return BatchPlan(total, math.log2(total), n, 2**n / total, True)
    n = math.floor(log2_total)
    return BatchPlan(None, log2_total, n, 2.0 ** (n - log2_total), False)


def trimmed_ebits(m: int, draws, policy: TrimPolicy = "discard") -> int:
    """Ebits obtained from an ``m``-term superposition given uniform ``draws``.

    One draw is consumed per trimming attempt. Under ``discard`` a failed
    trim leaves nothing; under ``recursive`` the residual superposition is
    trimmed again until it succeeds or a single term remains.
    """
    it = iter(draws)
    while m >= 1:
        n = m.bit_length() - 1
        if m == 2**n:
            return n
        if next(it) < 2**n / m:
            return n
        if policy == "discard":
            return 0
        m -= 2**n
    return 0


def expected_trimmed_ebits(m: int, policy: TrimPolicy = "discard") -> float:
    if m < 1:
        raise ValueError("m must be >= 1")
    n = m.bit_length() - 1
    if m == 2**n:
        return float(n)
    succ = 2**n / m
    rest = expected_trimmed_ebits(m - 2**n, policy) if policy == "recursive" else 0.0
    return succ * n + (1 - succ) * rest


def equal_superposition(m: int) -> StateVector:
    """``sum_i |i>_A |i>_B / sqrt(m)`` with each side on ``ceil(log2 m)`` qubits (at least one)."""
    q = max(1, (m - 1).bit_length())
    amps = np.zeros(4**q)
    amps[[i * 2**q + i for i in range(m)]] = 1 / math.sqrt(m)
    labels = [QubitLabel("Alice")] * q + [QubitLabel("Bob")] * q
    return make_state(2 * q, amps, labels)


def trim_branches(m: int) -> list[MeasurementRecord]:
    """Alice's trimming filter on an ``m``-term superposition.

    Outcome 0 keeps the first ``2**n`` terms; outcome 1 is the residual.
    """
    state = equal_superposition(m)
    q = state.num_qubits // 2
    n = m.bit_length() - 1
    keep = (np.arange(2**q) < 2**n).astype(float)
    pset = ProjectorSet(tuple(range(q)), (keep, 1.0 - keep))
    probs = outcome_probabilities(state, pset)
    return [project(state, pset, i) for i in (0, 1) if probs[i] > 0]


# ---------------------------------------------------------------------------
# Monte Carlo yield


@dataclass(frozen=True)
class YieldReport:
    spec: EnsembleSpec
    batch_size: int
    trim_policy: str
    trials: int
    mean_rate: float
    stderr: float
    exact_entropy_rate: float
    target_entropy: float
    rate_sum: float = field(repr=False, default=0.0)
    rate_sq_sum: float = field(repr=False, default=0.0)


def _report(spec, batch_size, policy, rates) -> YieldReport:
    rates = np.asarray(rates, dtype=float)
    return _from_sums(spec, batch_size, policy, len(rates), math.fsum(rates), math.fsum(rates * rates))


def _from_sums(spec, batch_size, policy, n, s, ss) -> YieldReport:
    mean = s / n
    var = max(0.0, (ss - n * mean * mean) / (n - 1)) if n > 1 else 0.0
    if spec.p == 0.5:
        # every input pair is already an ebit; no sampling error
        mean, var = 1.0, 0.0
    return YieldReport(
        spec, batch_size, policy, n, mean, math.sqrt(var / n),
        exact_entropy_rate(spec), spec.pair.entropy, s, ss,
    )


def merge_reports(reports: Sequence[YieldReport]) -> YieldReport:
    """Pool reports from disjoint trial blocks of one configuration."""
    if not reports:
        raise ValueError("nothing to merge")
    r0 = reports[0]
    n = sum(r.trials for r in reports)
    s = math.fsum(r.rate_sum for r in reports)
    ss = math.fsum(r.rate_sq_sum for r in reports)
    if r0.spec.p == 0.5:
        return YieldReport(r0.spec, r0.batch_size, r0.trim_policy, n, 1.0, 0.0, r0.exact_entropy_rate, 1.0, s, ss)
    return _from_sums(r0.spec, r0.batch_size, r0.trim_policy, n, s, ss)


def simulate_yield(
    spec: EnsembleSpec,
    batch_size: int,
    trials: int,
    rng: np.random.Generator,
    trim_policy: TrimPolicy = "discard",
) -> YieldReport:
    """Ebits per input pair from collective measurement plus batching.

    Each trial takes ``batch_size`` pairs in ``batch_size // k`` groups of
    ``k``, draws each group's outcome, multiplies the term counts, and trims
    the product to a power of two. Pairs with ``p = 1/2`` are already ebits
    and are passed through untouched.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if batch_size < spec.k or batch_size % spec.k:
        raise ValueError(f"batch_size {batch_size} must be a positive multiple of k={spec.k}")
    if spec.p == 0.5:
        return _report(spec, batch_size, trim_policy, np.ones(trials))

    dist = outcome_distribution(spec)
    counts = dist.term_counts
    cdf = np.cumsum(dist.probabilities)
    groups = batch_size // spec.k
    draws = np.searchsorted(cdf, rng.random((trials, groups)) * cdf[-1], side="right")
    draws = np.minimum(draws, spec.k)

    rates = np.empty(trials)
    for t in range(trials):
        plan = batch_terms([counts[j] for j in draws[t]])
        if plan.exact:
            ebits = trimmed_ebits(plan.accumulated_terms, _uniforms(rng), trim_policy)
        else:
            ebits = plan.target_power if rng.random() < plan.trim_success_prob else 0
        rates[t] = ebits / batch_size
    return _report(spec, batch_size, trim_policy, rates)


def _uniforms(rng):
    while True:
        yield rng.random()


def batched_yield_rate(spec: EnsembleSpec, batch_size: int, trim_policy: TrimPolicy = "discard") -> float:
    """Exact expected ebits per pair for :func:`simulate_yield`, by convolving group outcomes."""
    if spec.p == 0.5:
        return 1.0
    dist = outcome_distribution(spec)
    by_product: dict[int, float] = {1: 1.0}
    for _ in range(batch_size // spec.k):
        nxt: dict[int, float] = {}
        for m, pm in by_product.items():
            for e in dist.entries:
                if e.probability > 0:
                    key = m * e.term_count
                    nxt[key] = nxt.get(key, 0.0) + pm * e.probability
        by_product = nxt
    return math.fsum(pm * expected_trimmed_ebits(m, trim_policy) for m, pm in by_product.items()) / batch_size


# ---------------------------------------------------------------------------
# Typical subspace


def typical_shells(spec: EnsembleSpec, epsilon: float) -> list[int]:
    """Shells ``j`` in the order they enter the typical subspace, stopping at ``1 - epsilon`` mass."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    k, p = spec.k, spec.p

    def per_string(j):
        if p == 1.0:
            return 0.0 if j == 0 else -math.inf
        return (k - j) * math.log(p) + j * math.log1p(-p)

    order = sorted(range(k + 1), key=lambda j: (-per_string(j), j))
    shells, mass = [], []
    for j in order:
        shells.append(j)
        mass.append(math.exp(_log_pmf(k, j, p)) if k > EXACT_LOG2_LIMIT else _comb(k, j) * p ** (k - j) * (1 - p) ** j)
        if math.fsum(mass) >= 1.0 - epsilon:
            break
    return shells


def typical_subspace_log_dim(spec: EnsembleSpec, epsilon: float) -> float:
    """``log2`` of the number of spin strings in the smallest union of shells holding ``1 - epsilon`` of the mass."""
    total = sum(_comb(spec.k, j) for j in typical_shells(spec, epsilon))
    return math.log2(total)
