"""Reconstruction of point configurations from unlabeled length measurements.

A hidden configuration of n points is probed along paths or loops; only
the multiset of measured lengths survives.  This package simulates such
measurements and reconstructs the configuration — up to congruence,
relabeling, and an integer scale — by exhaustively recognizing complete
subgraphs in the data and growing them through trilateration.
"""

from .engine import (
    CandidateBase,
    NoBaseFound,
    PartialReconstruction,
    ReconstructionResult,
    TrilaterationStep,
    VerificationVerdict,
    find_candidate_bases,
    grow,
    reconstruct,
    trilaterate_step,
    verify,
)
from .geometry import (
    AnchorsDegenerate,
    Configuration,
    Degenerate,
    EdgeIndexing,
    NotRealizable,
    align_onto,
    are_congruent,
    are_similar_ordered,
    cayley_menger_det,
    cm_residual,
    edge_count,
    embed_simplex,
    measure_all_lengths,
    min_pairwise_distance,
    squared_distance,
    squared_distances,
)
from .io import (
    ExperimentSpec,
    InvalidSpec,
    MalformedInput,
    random_configuration,
)
from .measurement import (
    CanonicalMatrix,
    DataSet,
    LengthFunctional,
    MeasurementEnsemble,
    Path,
    apply_functional,
    build_trilateration_ensemble,
    canonical_matrix,
    functional_from_path,
    measure,
)
from .membership import (
    MembershipVerdict,
    SingularityVerdict,
    is_singular_L24,
    membership_L,
    rank6_shortcut,
)
from .relations import (
    RankVerdict,
    RelationCertificate,
    SearchBudgetExceeded,
    exact_integer_det,
    find_integer_relation_brute,
    find_integer_relation_reduced,
    rational_rank_at_least,
)

__version__ = "0.1.0"

__all__ = [
    "AnchorsDegenerate",
    "CandidateBase",
    "CanonicalMatrix",
    "Configuration",
    "DataSet",
    "Degenerate",
    "EdgeIndexing",
    "ExperimentSpec",
    "InvalidSpec",
    "LengthFunctional",
    "MalformedInput",
    "MeasurementEnsemble",
    "MembershipVerdict",
    "NoBaseFound",
    "NotRealizable",
    "PartialReconstruction",
    "Path",
    "RankVerdict",
    "ReconstructionResult",
    "RelationCertificate",
    "SearchBudgetExceeded",
    "SingularityVerdict",
    "TrilaterationStep",
    "VerificationVerdict",
    "align_onto",
    "apply_functional",
    "are_congruent",
    "are_similar_ordered",
    "build_trilateration_ensemble",
    "canonical_matrix",
    "cayley_menger_det",
    "cm_residual",
    "edge_count",
    "embed_simplex",
    "exact_integer_det",
    "find_candidate_bases",
    "find_integer_relation_brute",
    "find_integer_relation_reduced",
    "functional_from_path",
    "grow",
    "is_singular_L24",
    "measure",
    "measure_all_lengths",
    "membership_L",
    "min_pairwise_distance",
    "random_configuration",
    "rank6_shortcut",
    "rational_rank_at_least",
    "reconstruct",
    "squared_distance",
    "squared_distances",
    "trilaterate_step",
    "verify",
]
