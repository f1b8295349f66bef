"""Weight calculus for so(n), Weitzenboeck formulas and mass-theorem checks."""
from __future__ import annotations

from .geometry import (
    FrameData,
    MetricChart,
    builtin_chart,
    connection_form_asymptotic,
    connection_form_exact,
    h_map,
    pi_projection,
)
from .mass import MassReport, boundary_term, mass_quadrature, theorem_check
from .quadrature import SphereQuadrature, sphere_quadrature
from .spectral import (
    BOperator,
    CapabilityError,
    ConsistencyError,
    MatrixRep,
    ProjectionSet,
    build_B,
    build_projections,
    build_rep,
    symbol_matrix,
)
from .weights import (
    Decomposition,
    DominantWeight,
    Summand,
    casimir,
    conformal_weight,
    decompose,
    is_dominant,
    parse_weight,
    weyl_dimension,
)
from .weitzenbock import (
    CoefficientVector,
    WeitzenbockBasis,
    classify,
    mass_coefficient,
    universal_mass_coefficient,
    universal_vector,
    weitzenbock_basis,
)

__version__ = "0.1.0"

__all__ = [
    "MassReport",
    "boundary_term",
    "mass_quadrature",
    "theorem_check",
    "SphereQuadrature",
    "sphere_quadrature",
    "FrameData",
    "MetricChart",
    "builtin_chart",
    "connection_form_asymptotic",
    "connection_form_exact",
    "h_map",
    "pi_projection",
    "BOperator",
    "CapabilityError",
    "ConsistencyError",
    "MatrixRep",
    "ProjectionSet",
    "build_B",
    "build_projections",
    "build_rep",
    "symbol_matrix",
    "Decomposition",
    "DominantWeight",
    "Summand",
    "casimir",
    "conformal_weight",
    "decompose",
    "is_dominant",
    "parse_weight",
    "weyl_dimension",
    "CoefficientVector",
    "WeitzenbockBasis",
    "classify",
    "mass_coefficient",
    "universal_mass_coefficient",
    "universal_vector",
    "weitzenbock_basis",
]
