"""Nehari-manifold methods over cones for 1D Dirichlet problems.

Energies with homogeneous pieces are discretized on a uniform grid; fibering
maps ``t -> Phi(t u)`` are analysed exactly, spectral thresholds and
extremal parameters are computed by preconditioned descent, and relative
ground states are found by minimizing the energy over the Nehari set
intersected with a cone.
"""

__version__ = "0.1.0"

from .config import RunConfig, parse_config
from .energy import (
    FAMILIES,
    ConcaveConvex,
    ConeReport,
    EnergyModel,
    GeneralizedQuasi,
    GeneralKirchhoff,
    GradientSystem,
    Kirchhoff,
    PQConcave,
    PQConvex,
    PQEigen,
    Superlinear,
    cone_membership,
    evaluate,
    fibering_profile,
    gradient,
    make_model,
    nehari_residual,
)
from .estimators import (
    ExtremalParameter,
    FiberingClassifier,
    FirstEigenvalue,
    NehariSolver,
    RayleighQuotient,
)
from .exceptions import (
    DomainError,
    GeometryError,
    InfeasibleError,
    InvalidInputError,
    NehariError,
    NonConvergenceError,
    NotFoundError,
)
from .fibering import (
    CriticalPoint,
    FiberingProfile,
    GeometryClass,
    classify,
    critical_points,
    first_min,
    last_max,
)
from .grid import Grid1D, GridFunction, PairGridFunction
from .rayleigh import (
    QuotientSpec,
    brute_force_parameter,
    extremal_parameter,
    parametric_profile,
    quotient,
)
from .solver import (
    SolveReport,
    minimize_relative_ground_state,
    project_to_nehari,
    second_solution_search,
    verify_critical,
)
from .spectrum import (
    alpha_star,
    beta_star,
    eigen_p,
    kirchhoff_lambda_star,
    kirchhoff_mu1,
    kirchhoff_mu_star,
)
from .weights import named_weight, resolve_weight

__all__ = [name for name in dir() if not name.startswith("_")]
