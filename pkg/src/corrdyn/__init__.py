"""corrdyn: iteration of holomorphic correspondences on the sphere.

Fibers and branch tracking for correspondences defined by bivariate
polynomial curves, empirical contraction certificates for small
perturbations of polynomial root maps, pushforward estimators of the
equidistribution measure, and quadtree coverings of minimal Hutchinson
invariant sets of linear differential operators.

Hot kernels (Horner evaluation, simultaneous root finding) run on a
compiled Cython core when available, with a pure-Python fallback selected
at import time; see corrdyn.BACKEND.
"""

from ._backend import BACKEND
from .algebra import (
    INFINITY,
    BiPoly,
    RootMultiset,
    ShiftedForm,
    UniPoly,
    falling_factorial,
    from_shifted_basis,
    parse_poly,
    parse_w_poly,
    poly_eval,
    poly_roots,
    to_shifted_basis,
)
from .correspondence import (
    BranchPoint,
    Certificate,
    Correspondence,
    EscapeResult,
    FamilySpec,
    build_family,
    certify,
    escape_radius,
)
from .diffop import (
    DiffOperator,
    TnBuild,
    build_Tn,
    hutchinson_threshold,
    is_exactly_solvable,
    is_nondegenerate,
    parse_operator,
)
from .invset import (
    CantorReport,
    CellSet,
    PeriodicOrbit,
    cantor_diagnostics,
    find_periodic_points,
    min_invariant_set,
    neighborhood_containment,
)
from .measure import (
    ConvergenceReport,
    GridDistance,
    PointMeasure,
    TestFunction,
    exact_pushforward,
    invariance_residual,
    measure_distance,
    moment_dictionary,
    push_from_infinity,
    push_once,
    sample_orbit_measure,
    transfer_apply,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BiPoly",
    "BranchPoint",
    "CantorReport",
    "CellSet",
    "Certificate",
    "ConvergenceReport",
    "Correspondence",
    "DiffOperator",
    "EscapeResult",
    "FamilySpec",
    "GridDistance",
    "INFINITY",
    "PeriodicOrbit",
    "PointMeasure",
    "RootMultiset",
    "ShiftedForm",
    "TestFunction",
    "TnBuild",
    "UniPoly",
    "build_Tn",
    "build_family",
    "cantor_diagnostics",
    "certify",
    "escape_radius",
    "exact_pushforward",
    "falling_factorial",
    "find_periodic_points",
    "from_shifted_basis",
    "hutchinson_threshold",
    "invariance_residual",
    "is_exactly_solvable",
    "is_nondegenerate",
    "measure_distance",
    "min_invariant_set",
    "moment_dictionary",
    "neighborhood_containment",
    "parse_operator",
    "parse_poly",
    "parse_w_poly",
    "poly_eval",
    "poly_roots",
    "push_from_infinity",
    "push_once",
    "sample_orbit_measure",
    "to_shifted_basis",
    "transfer_apply",
]
