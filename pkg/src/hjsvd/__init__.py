"""Hyperbolic SVD solver suite.

One-sided hyperbolic Jacobi solver for factors (G, J) with a step-parallel
modified modulus pivot strategy, doubling as a symmetric indefinite
eigensolver; plus a test-matrix factory, a pivot-strategy equivalence
laboratory, and a CLI/benchmark harness.
"""

from .errors import (
    DefinitenessLostError,
    NumericalSingularityError,
    RankDeficiencyError,
    ShapeError,
)
from .factory import (
    ALPHA,
    FactorPair,
    SpectrumSpec,
    TestBundle,
    bunch_parlett_factor,
    draw_spectrum,
    generate_factor_pair,
    generate_symmetric,
    qr_shorten,
)
from .linalg import (
    DEFAULT_CHUNK,
    EPS,
    SignatureVector,
    as_factor,
    dot_chunked,
    fused_pair_update,
    orthonormality_distance,
)
from .matio import read_csv_matrix, read_gjh, write_csv_matrix, write_gjh
from .rotation import (
    CODE_BIG,
    CODE_NONE,
    CODE_SMALL,
    TEPS,
    PivotGram,
    Rotation,
    compute_rotation,
    convergence_code,
    diagonal_update_predicted,
    relatively_orthogonal,
    rotation_params_batch,
)
from .solver import (
    BorderInfo,
    DiagonalPackageVector,
    HsvdResult,
    SolverConfig,
    border,
    check_convergence,
    drive,
    jacobi_step,
    precompute,
    recover_V,
    sort_diagonal,
    strip_bordered,
)
from .strategies import (
    CoverageReport,
    EquivalenceWitness,
    PivotOrdering,
    StepperState,
    enumerate_antidiagonal,
    enumerate_classic_modulus,
    enumerate_modified_modulus,
    enumerate_row_cyclic,
    shift_ordering,
    stepper_advance,
    stepper_advance_all,
    stepper_init,
    trace_equivalent,
    validate_coverage,
    weakly_equivalent_modulus_rowcyclic,
)

__version__ = "0.1.0"
