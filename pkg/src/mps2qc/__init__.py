"""mps2qc: decompose matrix product states into shallow staircase circuits.

The package provides an MPS engine, staircase circuits of two-qubit
unitaries, an analytic layer-by-layer disentangling decomposition, an
environment-tensor sweep optimizer, six decomposition protocols built from
those pieces, benchmark target states, and a reproducible benchmark CLI.
"""

from .analytic import analytic_decompose, chi2_mps_to_layer, disentangle_step
from .bench import (
    BenchmarkPlan,
    CostEstimate,
    default_plan,
    emit_plot_data,
    estimate_cost,
    load_plan,
    run_benchmark,
    save_plan,
)
from .circuit import (
    LinearLayer,
    StaircaseCircuit,
    apply_layer,
    circuit_fidelity,
    circuit_state,
    export_gate_list,
    identity_layer,
    load_circuit,
    random_layer,
    save_circuit,
)
from .linalg import (
    DEFAULT_TOLS,
    Tolerances,
    closest_unitary,
    complete_isometry,
    fractional_unitary_power,
    svd,
)
from .mps import (
    MPS,
    entanglement_entropy,
    fidelity,
    from_statevector,
    inner_product,
    load_mps,
    product_state,
    save_mps,
    zero_state,
)
from .protocols import (
    PROTOCOL_KINDS,
    DecompositionReport,
    ProtocolSpec,
    matched_budget,
    run_protocol,
)
from .sweep import (
    EnvironmentCache,
    FidelityTrace,
    SweepConfig,
    environment_tensor,
    local_update,
    sweep_optimize,
)
from .targets import (
    GridSpec,
    TargetDescriptor,
    bas_patterns,
    bas_superposition,
    build_heisenberg,
    build_target,
    grid_edges,
    heisenberg_ground_state,
    load_target,
    random_mps,
    save_target,
)

__version__ = "0.1.0"
