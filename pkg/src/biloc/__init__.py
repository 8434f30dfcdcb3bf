"""Bilocality analysis of entanglement-swapping networks with two-qubit sources."""

from .criteria import (
    BilocReport,
    biloc_criterion,
    bound_chain_check,
    critical_visibility_product,
    horodecki_chsh,
    mixed_pair_optimum,
    pure_pair_optimum,
)
from .network import (
    DichotomicSetting,
    JointMeasurement,
    TripartiteDistribution,
    biloc_score,
    born_distribution,
    canonical_bsm,
    compute_I,
    compute_J,
    sample_outcomes,
)
from .optimizer import (
    OptimizerConfig,
    SearchResult,
    activation_scan,
    maximize_fixed_bsm,
    maximize_general_bob,
    maximize_two_input_bob,
)
from .states import (
    DomainError,
    InvalidStateError,
    SchmidtPureState,
    TwoQubitState,
    correlation_spectrum,
    make_schmidt_state,
    make_werner,
    pauli_decompose,
    random_state,
)

__version__ = "0.1.0"
