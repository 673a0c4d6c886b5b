"""gammakernel: determinantal measures on the half-integer lattice.

A numerical library for the two-parameter family of z-measures on partitions
and the associated determinantal point processes on Z' = Z + 1/2: exact
weights, correlation kernels computed by four independent routes (integrable
closed form, contour integrals before and after the xi -> 1 limit, and
spectral projection of a tridiagonal difference operator), Fredholm
determinants of multiplicative functionals, exact Radon-Nikodym derivatives
under finitary permutations of the lattice, and exact sampling.
"""

import os as _os

# Cap BLAS/OpenMP threads before any numerical library loads; honoured by
# libraries that read these variables at load time.
if "GK_THREADS" in _os.environ:
    for _var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        _os.environ.setdefault(_var, _os.environ["GK_THREADS"])

from .lattice import (
    FiniteConfig,
    FinitaryPermutation,
    HalfInt,
    MayaDiagram,
    Partition,
    apply_sigma,
    apply_sigma_modified,
    dim_ratio,
    from_balanced_config,
    particle_hole_involution,
    to_balanced_config,
    to_maya,
)
from .special import digamma, log_gamma, pochhammer, pochhammer_lambda, trigamma
from .zmeasure import (
    OracleValue,
    Params,
    XiParams,
    correlation_oracle,
    enumerate_weights,
    log_weight_config,
    log_weight_partition,
    weight_config,
    weight_partition,
)
from .kernels import (
    NonConvergenceError,
    QuadratureConfig,
    WeightedBlocks,
    WindowKernel,
    density_constant,
    gauge_transform,
    j_transform,
    reflection_sign,
    underline_limit_contour,
    underline_limit_integrable,
    underline_limit_window,
    underline_prelimit_contour,
    underline_prelimit_spectral,
    underline_prelimit_window,
    weighted_blocks,
    window_points,
)
from .fredholm import (
    InverseDecay,
    SparseConfig,
    TestFunction,
    ZeroTail,
    expectation_det,
    expectation_sum,
    multiply_functionals,
    phi_eval,
    regularized_det,
    sparseness_certificate,
)
from .rn import (
    CylinderFunction,
    RnExpression,
    RnTerm,
    expand_cylinder,
    rn_closed_form,
    rn_compose,
    rn_exact,
    rn_limit,
    verify_limit_transport,
    verify_transport,
    word_window,
)
from .sampler import (
    Estimate,
    SampleBatch,
    sample_underline_then_involute,
    sample_window,
    write_jsonl,
)

__version__ = "0.1.0"

__all__ = [
    # lattice combinatorics
    "HalfInt",
    "Partition",
    "FiniteConfig",
    "MayaDiagram",
    "FinitaryPermutation",
    "to_maya",
    "to_balanced_config",
    "from_balanced_config",
    "particle_hole_involution",
    "apply_sigma",
    "apply_sigma_modified",
    "dim_ratio",
    # special functions
    "log_gamma",
    "digamma",
    "trigamma",
    "pochhammer",
    "pochhammer_lambda",
    # measure weights and enumeration oracles
    "Params",
    "XiParams",
    "log_weight_partition",
    "weight_partition",
    "log_weight_config",
    "weight_config",
    "enumerate_weights",
    "OracleValue",
    "correlation_oracle",
    # correlation kernels
    "WindowKernel",
    "QuadratureConfig",
    "NonConvergenceError",
    "window_points",
    "underline_limit_integrable",
    "underline_limit_contour",
    "underline_limit_window",
    "underline_prelimit_contour",
    "underline_prelimit_spectral",
    "underline_prelimit_window",
    "j_transform",
    "gauge_transform",
    "WeightedBlocks",
    "weighted_blocks",
    "density_constant",
    "reflection_sign",
    # multiplicative functionals and Fredholm determinants
    "TestFunction",
    "ZeroTail",
    "InverseDecay",
    "SparseConfig",
    "phi_eval",
    "multiply_functionals",
    "expectation_sum",
    "expectation_det",
    "regularized_det",
    "sparseness_certificate",
    # Radon-Nikodym derivatives and transport checks
    "RnTerm",
    "RnExpression",
    "rn_exact",
    "rn_closed_form",
    "rn_compose",
    "rn_limit",
    "word_window",
    "CylinderFunction",
    "expand_cylinder",
    "verify_transport",
    "verify_limit_transport",
    # exact sampling
    "Estimate",
    "SampleBatch",
    "sample_window",
    "sample_underline_then_involute",
    "write_jsonl",
    "__version__",
]
