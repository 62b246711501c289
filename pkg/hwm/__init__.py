"""有理データに対する半波写像方程式の厳密シミュレータとスペクトル解析."""
from hwm.errors import (
    ConstraintViolationError,
    ConvergenceError,
    DegenerateSpectrumError,
    DegenerateVelocityWarning,
    FallbackRefitWarning,
    HWMError,
    LaxInjectivityError,
    PoleMatchingError,
    RankError,
    SeparationError,
    SpectrumError,
    StereographicError,
)
from hwm.flow import (
    Snapshot,
    Trajectory,
    conservation_report,
    evaluate_flow,
    evolve,
    evolve_snapshot,
    group_consistency_check,
    pde_residual,
    pde_residual_order,
    pole_velocities,
    residue_dynamics_check,
    time_reversal_check,
    trajectory,
)
from hwm.hardy_ops import (
    H1Basis,
    build_h1,
    conserved_traces,
    gram_matrix,
    iplus,
    lax_spectrum,
    toeplitz_matrix,
)
from hwm.rational_maps import (
    GrassmannTarget,
    HalfDerivativeRep,
    PoleExpansion,
    RationalMap,
    ResiduePair,
    SphereMap,
    apply_halfD,
    difference,
    energy,
    evaluate,
    evaluate_derivative,
    from_stereographic,
    hwm_rhs,
    kronecker_rank,
    pauli_decode,
    pauli_encode,
    pole_expansion,
    rank1_factor,
    reflect,
    rescale,
    rotate,
    sobolev_seminorm,
    translate,
    validate,
)
from hwm.solitons import (
    ResolutionReport,
    SolitonDatum,
    check_solitary,
    multi_soliton,
    resolution_error,
    resolve,
    scattering_check,
    single_soliton,
    spin_vector_candidates,
)

__version__ = "0.1.0"

__all__ = [
    "ConstraintViolationError",
    "ConvergenceError",
    "DegenerateSpectrumError",
    "DegenerateVelocityWarning",
    "FallbackRefitWarning",
    "GrassmannTarget",
    "H1Basis",
    "HWMError",
    "HalfDerivativeRep",
    "LaxInjectivityError",
    "PoleExpansion",
    "PoleMatchingError",
    "RankError",
    "RationalMap",
    "ResiduePair",
    "ResolutionReport",
    "SeparationError",
    "Snapshot",
    "SolitonDatum",
    "SpectrumError",
    "SphereMap",
    "StereographicError",
    "Trajectory",
    "apply_halfD",
    "build_h1",
    "check_solitary",
    "conservation_report",
    "conserved_traces",
    "difference",
    "energy",
    "evaluate",
    "evaluate_derivative",
    "evaluate_flow",
    "evolve",
    "evolve_snapshot",
    "from_stereographic",
    "gram_matrix",
    "group_consistency_check",
    "hwm_rhs",
    "iplus",
    "kronecker_rank",
    "lax_spectrum",
    "multi_soliton",
    "pauli_decode",
    "pauli_encode",
    "pde_residual",
    "pde_residual_order",
    "pole_expansion",
    "pole_velocities",
    "rank1_factor",
    "reflect",
    "rescale",
    "residue_dynamics_check",
    "resolution_error",
    "resolve",
    "rotate",
    "scattering_check",
    "single_soliton",
    "sobolev_seminorm",
    "spin_vector_candidates",
    "time_reversal_check",
    "toeplitz_matrix",
    "trajectory",
    "translate",
    "validate",
]
