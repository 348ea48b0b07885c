"""Activation-pattern mining and complete verification for ReLU networks."""

__version__ = "0.1.0"

from .model import (
    ActivationSignature,
    Layer,
    ModelFormatError,
    ModelValidationError,
    Network,
    dumps_network,
    load_network,
    loads_network,
    save_network,
)
from .nap import (
    LabelStats,
    MiningReport,
    Nap,
    extract,
    follows,
    load_nap,
    mine,
    nap_stats,
    overlap_ratio,
    save_nap,
    subsumes,
)
from .lp import (
    TAU_LP,
    FeasibilityResult,
    LinearConstraint,
    LinearProgram,
    LpInstabilityError,
    solve_feasibility,
)
from .verify import (
    Bounds,
    PhaseAssignment,
    Region,
    SearchConfig,
    SearchStats,
    VerifyOutcome,
    branch,
    encode_phase_constraints,
    propagate_bounds,
    verify_query,
)
from .properties import (
    NonAmbiguityResult,
    PropertyQuery,
    check_non_ambiguity,
    falsify,
    run_property,
    verify_augmented_robustness,
    verify_nap_robustness,
    verify_plain_robustness,
)
from .analysis import (
    DistanceStats,
    OverlapTable,
    RegionMap,
    linear_region_map,
    overlap_table,
    pairwise_distances,
)
from .datasets import DatasetFormatError, load_dataset, save_dataset
