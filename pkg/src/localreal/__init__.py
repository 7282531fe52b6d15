"""Numerical laboratory for spin correlations, classical-bound checks,
separated-process factorizations, and spatially localized measurements."""

from .hilbert import (
    DimensionMismatch,
    Operator,
    State,
    commutator_norm,
    expectation,
    identity,
    tensor,
)
from .spin import (
    ChshSettings,
    as_unit_vector,
    chsh_optimize,
    chsh_value,
    normalized,
    pauli_dot,
    plane_vector,
    planar_settings,
    singlet_state,
    spin_correlation,
)
from .lhv import (
    BoundCheck,
    LhvModel,
    McEstimate,
    chsh_bound_check,
    mc_correlation,
    model_correlation,
    model_from_config,
    random_model,
    sqrt3_model,
    tabulate_model,
    tabulated_model,
)
from .epr import (
    BivariateFactorization,
    CanonicalRotation,
    CrossMoments,
    DegenerateMomentError,
    ProcessPair,
    factorize_bivariate,
    process_correlation,
    process_pair_identity,
    process_pair_triangular,
    rotated_correlation,
    sample_processes,
    time_correlation,
    tmsv_moments,
    verify_moments,
)
from .spatial import (
    BoundCertificate,
    DetectorRegion,
    ScanPoint,
    Wavepacket,
    bounded_localized_model,
    disentanglement_scan,
    localization_factor,
    localized_correlation,
    quadrature_check,
    region_probability,
)
from .context import (
    Context,
    NonCommutingError,
    NonHermitianError,
    TranslationSystem,
    covariance_check,
    internal_symmetry_context,
    make_context,
    translation_context,
    translation_system,
)

__version__ = "0.1.0"
