"""Coconvex bodies in pointed polyhedral cones: volumes, measures, co-sums,
mixed volumes, inequality checks and Minkowski-problem solvers."""

__version__ = "0.1.0"

from .core import (
    CFullBody,
    DiscreteMeasure,
    canonicalize,
    co_sum,
    co_sum_all,
    coconvex_volume,
    cone_volume_measure,
    facet_areas,
    integrate_support,
    min_enclosing_t,
    mixed_area_measure,
    mixed_volume,
    mixed_volume_integral,
    restrict_to_normals,
    scale,
    support_height,
    support_value,
    surface_area_measure,
    truncate,
    truncation_difference_volume,
    validate_measure,
    wulff_shape,
)
from .exceptions import CoconvexError, DomainError, NonConvergence, ParseError
from .geometry import (
    PolyhedralCone,
    Tag,
    TruncatedPolytope,
    halfspace_to_vertices,
    in_omega,
    polar_cone,
    polytope_volume,
    truncated_cone,
    validate_cone,
)
from .inequalities import InequalityVerdict, bm_check, is_homothetic, minkowski_first_check, mixed_volume_first
from .oracles import MCEstimate, brute_cone_volume, fd_gradient, mc_volume
from .solver import (
    ConeVolumeSolver,
    SolverConfig,
    SolverReport,
    SurfaceMeasureSolver,
    exhaustion_experiment,
    solve_cone_volume,
    solve_surface,
    unit_volume_height,
    volume_functional,
    volume_gradient,
)
