"""Distances and fidelities between ensembles of quantum states, and the
measures between generalized measurements and POVMs built on top of them."""

from .channels import (
    ChoiEnsemble,
    GeneralizedMeasurement,
    Povm,
    WorstCaseOptions,
    apply_measurement,
    compose_measurements,
    dist_iso,
    dist_max,
    fid_iso,
    fid_min,
    is_unital,
    jamiolkowski_ensemble,
    make_measurement,
    make_povm,
    povm_distance,
    povm_fidelity,
    povm_to_ensemble,
    projective_measurement,
)
from .ehs import (
    JointPair,
    SolveReport,
    SolverOptions,
    ehs_bures,
    ehs_distance,
    ehs_fidelity,
    pure_ensemble_fidelity,
    uhlmann_pure_ensembles,
)
from .ensembles import (
    EhsState,
    Ensemble,
    SupportPair,
    average_entropy,
    average_state,
    canonical_ehs_state,
    check_density,
    fannes_avg_entropy_bound,
    holevo_chi,
    make_ehs_state,
    make_ensemble,
    pure_state,
    unify_support,
)
from .errors import EnsembleMetricsError
from .kantorovich import (
    ContinuityReport,
    Coupling,
    LpSolution,
    check_average_continuity,
    coupling_lp,
    flagged_closed_form_distance,
    flagged_closed_form_fidelity,
    kantorovich_distance,
    kantorovich_fidelity,
    transportation_lp,
)
from .linalg import (
    fidelity,
    helstrom_pmax,
    herm_eig,
    partial_trace,
    tensor,
    trace_distance,
    trace_norm,
    von_neumann_entropy,
)

__version__ = "0.1.0"

__all__ = [
    "ChoiEnsemble",
    "ContinuityReport",
    "Coupling",
    "EhsState",
    "Ensemble",
    "EnsembleMetricsError",
    "GeneralizedMeasurement",
    "JointPair",
    "LpSolution",
    "Povm",
    "SolveReport",
    "SolverOptions",
    "SupportPair",
    "WorstCaseOptions",
    "apply_measurement",
    "average_entropy",
    "average_state",
    "canonical_ehs_state",
    "check_average_continuity",
    "check_density",
    "compose_measurements",
    "coupling_lp",
    "dist_iso",
    "dist_max",
    "ehs_bures",
    "ehs_distance",
    "ehs_fidelity",
    "fannes_avg_entropy_bound",
    "fid_iso",
    "fid_min",
    "fidelity",
    "flagged_closed_form_distance",
    "flagged_closed_form_fidelity",
    "helstrom_pmax",
    "herm_eig",
    "holevo_chi",
    "is_unital",
    "jamiolkowski_ensemble",
    "kantorovich_distance",
    "kantorovich_fidelity",
    "make_ehs_state",
    "make_ensemble",
    "make_measurement",
    "make_povm",
    "partial_trace",
    "povm_distance",
    "povm_fidelity",
    "povm_to_ensemble",
    "projective_measurement",
    "pure_ensemble_fidelity",
    "pure_state",
    "tensor",
    "trace_distance",
    "trace_norm",
    "transportation_lp",
    "uhlmann_pure_ensembles",
    "unify_support",
    "von_neumann_entropy",
]
