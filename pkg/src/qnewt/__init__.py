"""Newton-type methods on quasi-metric spaces."""

from .differential import (
    DiffabilityReport,
    NewtonDifferential,
    Selection,
    check_pointwise_diffability,
    check_uniform_diffability,
    combine_chain,
    combine_direct_sum,
    combine_product,
    combine_sum,
    remainder,
    singleton_differential,
    zero_differential,
)
from .exceptions import QNewtError
from .kantorovich import (
    MajorantCertificate,
    Majorant,
    admissible_B,
    estimate_B,
    estimate_eta,
    estimate_L,
    majorant_sequence,
    run_certified_newton,
    scalar_newton_map,
    verify_majorant,
)
from .pseudolinear import (
    PseudoLinearMap,
    QuasiInverse,
    check_h_smooth,
    check_pseudo_linear,
    check_strong_compatibility,
    estimate_operator_norm,
)
from .qspace import (
    Ball,
    FunctionSpace,
    QuasiMetricSpace,
    RateReport,
    check_axioms,
    classify_rate,
    dist_point_set,
    dist_set_set,
    lipschitz_estimate,
)
from .solver import IterationTrace, SolveConfig, analyze_trace, banach_iterate, newton_solve, newton_step

__version__ = "0.1.0"
