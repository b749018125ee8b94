"""Convex least-squares estimation of discrete pmfs and simulation of its weak limit."""

__version__ = "0.1.0"

from .estimator import (  # noqa: E402
    Certificate,
    CertificateFailure,
    LseResult,
    Sample,
    empirical_pmf,
    fenchel_check,
    h_diagnostic,
    localized_lse,
    lse,
)
from .limit import (  # noqa: E402
    GaussianSample,
    LimitSample,
    certificate_limit,
    limit_minimizer,
    localized_left,
    localized_right,
    sample_limit_distribution,
    simulate_w,
)
from .pmf import (  # noqa: E402
    KnotSet,
    MixtureWeights,
    Pmf,
    cdf,
    h_process,
    is_convex,
    knots,
    laplacian,
    mixture_compose,
    mixture_decompose,
    norm,
    triangular,
    truncated_geometric,
)
from .projection import (  # noqa: E402
    ConeSpec,
    NonConvergence,
    dykstra_project,
    kkt_oracle,
    project_convex,
)
