"""Spectra, scattering and resonance perturbation theory on metric graphs."""

from .errors import (
    ContourThroughZero,
    DanglingReference,
    DivergentLeadIntegral,
    DuplicateId,
    GridTooCoarse,
    InputError,
    InvalidFamily,
    InvalidWindow,
    LoopEdge,
    MaxDepthExceeded,
    NonpositiveLength,
    NotEmbedded,
    NotIncident,
    NotOutgoing,
    NotSimple,
    OutOfRange,
    QgError,
    ResonanceTooDeep,
    SingularInconsistent,
    SolverError,
    SupportsOverlap,
)
from .graph import (
    Edge,
    Lead,
    MetricGraph,
    PerturbationFamily,
    adot,
    lengths_at,
    validate_graph,
)
from .kernel import backend_name
from .secular import (
    KIND_EMBEDDED,
    KIND_REAL_RESONANCE,
    KIND_RESONANCE,
    SecularSystem,
    SpectralPoint,
    build_secular,
    det_secular,
    eigenfunction,
    find_spectral_points,
    generalized_eigenfunction,
    generalized_eigenfunction_report,
    scattering_matrix,
    winding_number,
)
from .waves import (
    EdgeWave,
    boundary_sum,
    derivative,
    eval_wave,
    green_identity_defect,
    inner_product,
    norm,
    normal_derivative,
    vertex_trace,
)
from .fgr import FgrReport, fgr_coefficients, second_order_model, z_dot
from .tracker import (
    ModelComparison,
    Trajectory,
    compare_to_model,
    default_step_cap,
    eigenvalue_derivative_check,
    track,
)
from .quasimode import (
    Quasimode,
    build_shifted_quasimode,
    check_resonance_proximity,
    quasimode_from_resonance,
)
from . import fixtures

__version__ = "0.1.0"
