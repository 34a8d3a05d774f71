"""Exact piecewise-linear convex analysis on dual pairs: conjugates,
subdifferentials, cyclically monotone operator samples, chain-supremum
antiderivatives, exposed points, and certificate-producing searches."""

from .core import (
    DEFAULT_TOL,
    DomainError,
    EvalResult,
    GridFunction1D,
    InputError,
    MaxAffineFunction,
    OperatorSample,
    PreconditionError,
    ToleranceProfile,
    UnsupportedInputError,
    Vector,
    dot,
    eval_max_affine,
    grid_function,
    lower_convex_envelope,
    max_affine,
    norm,
    operator_sample,
    vector,
)
from .conjugate import (
    BiconjugateReport,
    ConjugateReport,
    biconjugate_check,
    conjugate_max_affine,
    discrete_conjugate,
    fast_conjugate_1d,
    young_fenchel_gap,
)
from .subdifferential import (
    EpsMembershipCertificate,
    SubdiffSet,
    directional_derivative,
    duality_swap_check,
    eps_subdiff_member,
    eps_subdiff_witness,
    subdiff,
)
from .cyclic import (
    AntiderivativeResult,
    CycleCertificate,
    NotCyclicallyMonotoneError,
    build_antiderivative,
    chain_sup_bruteforce,
    check_cyclic,
    check_cyclic_bruteforce,
    check_graph_inclusion,
    check_monotone,
)
from .exposed import (
    DensityReport,
    ExposureCertificate,
    PointBody,
    density_check,
    epi_pointed,
    exp_g,
    exp_points,
    expose,
    point_body,
    support_function,
)
from .bronsted import (
    BorweinCertificate,
    LemmaResult,
    RefinementResult,
    density_probe,
    exact_pairs,
    l1_search,
    l2_search,
    t0_refine,
    t1_refine,
)
from .reconstruct import (
    ReconstructionReport,
    convergence_study,
    dual_case_study,
    reconstruct,
    sample_subdifferential,
)

__version__ = "0.1.0"
