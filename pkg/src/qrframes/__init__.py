"""Relational classical and quantum reference frames for finite groups."""

from .classical import (
    ClassicalState,
    ProbabilisticClassicalState,
    change_frame_classical,
    discrepancy_check,
    external_state,
    infer_average_state,
    irreversible_change_classical,
    relative_state,
    truncate_classical,
)
from .errors import (
    DimensionError,
    FrameError,
    GroupAxiomError,
    GroupSpecError,
    ModelError,
    QRFError,
    ScenarioError,
)
from .groups import (
    FiniteGroup,
    SubgroupDecomposition,
    TranslationLine,
    build_group,
    compose,
    factorize,
    inverse,
    verify_group_axioms,
)
from .hilbert import (
    Encoded,
    QuantumState,
    Regular,
    basis_state,
    encode_group_element,
    half_angle_encoding,
    inner_product,
    product_state,
    regular_encoding,
    schmidt_rank,
    superpose,
)
from .irreversible import TruncationMap, change_frame_irreversible, truncate_state
from .report import Check, VerificationReport
from .reversible import (
    DenseOperator,
    ObservableMatrix,
    build_dense_operator,
    change_frame,
    change_frame_mixed,
    change_frame_quantum,
    regular_action,
    transform_observable,
    translation_equivalence_check,
    verify_lemmas,
)
from .scenarios import WignerResult, run_scenario, run_wigner
from .theory import ProbeReport, consistency_probe, linearity_counterexample, orthonormality_crosscheck

__version__ = "0.1.0"
