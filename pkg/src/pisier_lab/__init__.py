"""Fourier analysis on the discrete cube with verified inequality pipelines.

Building blocks: scalar and vector functions on {+1,-1}^n with fast
Walsh-Hadamard transforms, a norm suite, the explicit trigonometric proxy
for the linear part, end-to-end audits of the Rademacher projection, and
explicit bounded witnesses that force the projection to blow up.
"""

import os as _os

# Thread cap must land in the environment before numpy loads its BLAS pools.
_threads = _os.environ.get("PISIER_LAB_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                 "NUMEXPR_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from .cube_fourier import (  # noqa: E402
    MAX_DIM,
    CubeFunction,
    character_eval,
    character_values,
    convolve,
    from_bytes,
    from_spectrum_json,
    fwht,
    group_mul,
    inverse_fwht,
    linear_function,
    project_degree_one,
    read_binary,
    spectrum_sparsity,
    to_bytes,
    to_spectrum_json,
    write_binary,
)
from .linear_proxy import (  # noqa: E402
    AngleGrid,
    ProxyKernel,
    deviation_bound,
    kernel_l1,
    kernel_moment,
    kernel_value,
    make_grid,
    proxy_as_cube_function,
    proxy_eval_by_weight,
    proxy_l1,
    proxy_level_coeffs,
)
from .lower_bound import (  # noqa: E402
    LowerBoundInstance,
    build_chebyshev_witness,
    build_product_witness,
    build_truncated_witness,
    lower_bound_instance,
    sparsity_inequality_check,
    structural_sparsity,
    truncation_level,
    truncation_tail_bound,
    truncation_tail_chain,
)
from .pisier_bench import (  # noqa: E402
    PisierAudit,
    choose_ell,
    decomposition_audit,
    pisier_ratio,
)
from .report import BoundReport, BoundViolationError, ResourceLimitError  # noqa: E402
from .vector_field import (  # noqa: E402
    Norm,
    SandwichTransform,
    VectorFunction,
    apply_linear,
    mean_square_norm,
    rademacher_projection,
    read_vector,
    sandwich_validate,
    sup_functional_norm,
    vector_convolve,
    write_vector,
    young_bound_check,
)

__all__ = [
    "MAX_DIM",
    "AngleGrid",
    "BoundReport",
    "BoundViolationError",
    "CubeFunction",
    "LowerBoundInstance",
    "Norm",
    "PisierAudit",
    "ProxyKernel",
    "ResourceLimitError",
    "SandwichTransform",
    "VectorFunction",
    "apply_linear",
    "build_chebyshev_witness",
    "build_product_witness",
    "build_truncated_witness",
    "character_eval",
    "character_values",
    "choose_ell",
    "convolve",
    "decomposition_audit",
    "deviation_bound",
    "from_bytes",
    "from_spectrum_json",
    "fwht",
    "group_mul",
    "inverse_fwht",
    "kernel_l1",
    "kernel_moment",
    "kernel_value",
    "linear_function",
    "lower_bound_instance",
    "make_grid",
    "mean_square_norm",
    "pisier_ratio",
    "project_degree_one",
    "proxy_as_cube_function",
    "proxy_eval_by_weight",
    "proxy_l1",
    "proxy_level_coeffs",
    "rademacher_projection",
    "read_binary",
    "read_vector",
    "sandwich_validate",
    "sparsity_inequality_check",
    "spectrum_sparsity",
    "structural_sparsity",
    "sup_functional_norm",
    "to_bytes",
    "to_spectrum_json",
    "truncation_level",
    "truncation_tail_bound",
    "truncation_tail_chain",
    "vector_convolve",
    "write_binary",
    "write_vector",
    "young_bound_check",
]

__version__ = "0.1.0"
