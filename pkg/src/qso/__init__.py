"""Quadratic stochastic operators: evaluation, surjectivity, preimages, and
block-constant Hammerstein equations."""

from .analysis import (
    OPStatus,
    OrthogonalityVerdict,
    Status,
    SurjectivityVerdict,
    check_orthogonality_preserving,
    check_surjectivity,
    extract_fixed_index_sets,
    find_pi_volterra_permutation,
    is_volterra,
    volterra_skew_form,
)
from .errors import *  # noqa: F401,F403
from .hammerstein import (
    DensitySolution,
    HammersteinProblem,
    kernel_from_K,
    residual_hammerstein,
    solve_hammerstein,
    weak_form,
)
from .measure import (
    Partition,
    PartitionMeasure,
    QuadratureResult,
    TransitionKernel,
    apply_qso,
    canonical_kernel,
    check_escape_sets,
    check_projective_surjectivity,
    consistency_check,
    discretize_kernel,
    escape_free_kernel,
    measure_of_set,
    partition_measure,
    quadrature_discretize,
    qso_measure_of_set,
    solve_projective_preimage,
)
from .preimage import (
    PreimageSolution,
    invert_volterra,
    least_squares_preimage,
    solve_preimage,
    verify_preimage,
)
from .simplex import (
    HereditaryTensor,
    as_vector,
    basis_vector,
    evaluate_dqso,
    is_orthogonal,
    is_simplex_point,
    mass,
    support,
    validate_tensor,
)

__version__ = "0.1.0"
