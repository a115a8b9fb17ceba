"""Bishop discs for real n-submanifolds of almost complex C^n.

Spectral singular-integral calculus on the circle and disc, almost
complex structures with their Beltrami matrices, elliptic normal forms,
closed-form model disc families, and the nonlinear solvers that deform
them to small dilation parameters.
"""

from .circle import BoundaryFunction, BoundaryGrid, cauchy_extend, \
    cauchy_pv, hilbert, mean_value, plemelj_minus, plemelj_plus, \
    resynthesize, schwarz
from .disc import DiscFunction, DiscGrid, cauchy_extension, cauchy_green, \
    cauchy_green_at, dbar, dz, generalized_cauchy_residual
from .errors import ConfigError, ConvergenceError, StructureError
from .family import DiscFamily, foliation_report, rank_report, sweep
from .manifolds import DefiningFunction, GenericGraphSpec, SubmanifoldSpec
from .model import EllipseMap, ModelDisc, build_ellipse_map, \
    degenerate_disc, model_disc, sigma_set
from .polyfield import ComplexPolynomial
from .solver import BishopDisc, CorrectionOperator, GenericSolveConfig, \
    SolverConfig, continuation_solve, newton_solve, solve_generic, undilate
from .structures import AlmostComplexStructure, Dilation, beltrami_matrix, \
    holomorphy_residual, nilpotent_structure, structure_distance, \
    transport_structure

__version__ = "0.1.0"

__all__ = [
    "BoundaryFunction", "BoundaryGrid", "cauchy_extend", "cauchy_pv",
    "hilbert", "mean_value", "plemelj_minus", "plemelj_plus",
    "resynthesize", "schwarz",
    "DiscFunction", "DiscGrid", "cauchy_extension", "cauchy_green",
    "cauchy_green_at", "dbar", "dz", "generalized_cauchy_residual",
    "ConfigError", "ConvergenceError", "StructureError",
    "DiscFamily", "foliation_report", "rank_report", "sweep",
    "DefiningFunction", "GenericGraphSpec", "SubmanifoldSpec",
    "EllipseMap", "ModelDisc", "build_ellipse_map", "degenerate_disc",
    "model_disc", "sigma_set",
    "ComplexPolynomial",
    "BishopDisc", "CorrectionOperator", "GenericSolveConfig",
    "SolverConfig", "continuation_solve", "newton_solve", "solve_generic",
    "undilate",
    "AlmostComplexStructure", "Dilation", "beltrami_matrix",
    "holomorphy_residual", "nilpotent_structure", "structure_distance",
    "transport_structure",
    "__version__",
]
