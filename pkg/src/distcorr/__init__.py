"""Distance-based measures of total, classical-quantum and quantum correlations."""
__version__ = "0.1.0"

from .correlations import (
    CorrelationReport,
    NumericalFault,
    classical_correlations_entropic,
    cq_correlations,
    cq_correlations_fixed,
    discord,
    mutual_information,
    quantum_correlations,
    total_correlations,
)
from .distances import (
    BURES_SQ,
    DISTANCES,
    HELLINGER_SQ,
    QJSD,
    RELATIVE_ENTROPY,
    TRACE,
    DistanceMeasure,
    Prop,
    bures_sq,
    fidelity,
    get_distance,
    hellinger_sq,
    qjsd,
    relative_entropy,
    trace_distance,
)
from .measurements import (
    KrausChannel,
    VonNeumannMeasurement,
    apply_channel,
    apply_measurement,
    measurement_from_params,
)
from .optimize import OptimizerConfig, OptimizerDiagnostics
from .state_space import (
    DensityMatrix,
    InvalidStateError,
    StateFileError,
    load_state,
    make_bell,
    make_werner,
    partial_trace,
    random_density,
    save_state,
    von_neumann_entropy,
)
from .verify import (
    VerificationSuiteResult,
    verify_distance_axioms,
    verify_measure_conditions,
    verify_prop_vi_preconditions,
)
