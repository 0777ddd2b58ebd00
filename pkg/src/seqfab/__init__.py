"""Sequential, ancilla-assisted approximation of nonlocal multiqubit gates."""

__version__ = "0.1.0"

from .gates import GateSpec, gate, pauli_basis_two_site, su_generators  # noqa: E402
from .kraus import (  # noqa: E402
    FanoForm,
    KrausSet,
    apply_channel,
    correlation_sensitivity,
    fano_decompose,
    kraus_from_dilation,
    nogo_witness,
)
from .schmidt import OperatorSchmidtDecomposition, is_entangling, operator_schmidt, schmidt_strength  # noqa: E402
from .vmpo import (  # noqa: E402
    OptimizationReport,
    OptimizerConfig,
    SequentialCircuit,
    cost,
    environment,
    fidelity_gap,
    optimize,
    seq_to_global,
)

__all__ = [
    "FanoForm",
    "GateSpec",
    "KrausSet",
    "OperatorSchmidtDecomposition",
    "OptimizationReport",
    "OptimizerConfig",
    "SequentialCircuit",
    "apply_channel",
    "correlation_sensitivity",
    "cost",
    "environment",
    "fano_decompose",
    "fidelity_gap",
    "gate",
    "is_entangling",
    "kraus_from_dilation",
    "nogo_witness",
    "operator_schmidt",
    "optimize",
    "pauli_basis_two_site",
    "schmidt_strength",
    "seq_to_global",
    "su_generators",
]
