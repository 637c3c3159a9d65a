"""Pure-state simulation of entanglement manipulation: teleportation,
one-time-pad keying, local filtering, and collective concentration."""

from .concentration import (
    BatchPlan,
    EnsembleSpec,
    OutcomeDistribution,
    YieldReport,
    batch_terms,
    collective_z_measure,
    exact_entropy_rate,
    outcome_distribution,
    simulate_yield,
    typical_subspace_log_dim,
)
from .protocols import (
    FilterSpec,
    PairSpec,
    QubitState,
    bell_basis,
    local_filter,
    make_psi_alpha,
    otp_decrypt,
    otp_encrypt,
    otp_keygen,
    teleport,
)
from .schmidt import Bipartition, SchmidtSpectrum, entanglement_of, entropy_of_entanglement, schmidt_spectrum
from .state import (
    LocalUnitary,
    MeasurementRecord,
    ProjectorSet,
    StateVector,
    apply_local,
    fidelity,
    make_state,
    measure_projectors,
    tensor,
)

__version__ = "0.1.0"
