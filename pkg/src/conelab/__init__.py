"""Ellipsoidal-cone characterizations as numerical predicates.

A cone over an ellipsoid is singled out among closed pointed convex cones
by two properties: ``∂C ∩ ∂(a − C)`` spans a hyperplane for every interior
``a``, and every bounded section is centrally symmetric.  This package
measures both properties on concrete cones and drives experiments that
compare them with a direct quadric fit.
"""

from .centroids import (
    CentroidSearchResult,
    ChordRatio,
    HammerReport,
    find_centroid_section,
    hammer_check,
    section_boundary_equality,
)
from .characterize import (
    CSSReport,
    EllipsoidFit,
    FBIReport,
    analytic_fbi_hyperplane,
    cone_ellipsoid_fit,
    css_sweep,
    ellipsoid_section_scan,
    fbi_defect,
    fit_ellipsoid,
    inscribed_parallelogram,
    symmetry_defect,
)
from .cones import (
    ConeSpec,
    Membership,
    Section,
    centroid_of_section,
    cone_from_dict,
    cone_to_dict,
    contains,
    dual_interior_contains,
    load_cone,
    save_cone,
    section_of,
)
from .errors import (
    ConeLabError,
    InvalidConeError,
    NotInteriorError,
    SearchBudgetExhausted,
    UnboundedSectionError,
)
from .families import generate_family
from .gamma import (
    GammaCurve,
    GammaSample,
    chord_opposite_endpoint,
    gamma_central_symmetry_check,
    gamma_curve,
    gamma_scale,
)
from .linalg import Hyperplane, affine_rank, fit_hyperplane, symmetric_eigen

__version__ = "0.1.0"
