"""Co-rotational chiral magnetic skyrmion profiles and their perturbation theory."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .errors import (
    ConvergenceError,
    DomainError,
    LinearSolveError,
    OutOfRangeError,
    ParameterError,
    ResolutionError,
    RootBracketError,
    SkyrmionError,
    StagnationError,
)
from .model import ModelParams, energy_breakdown
from .numerics import Profile, RadialGrid, build_grid
from .solver import SolveOptions, SolveReport, continuation, gradient_flow, solve_newton
from .analysis import find_mu, invert_relation, perturbation_record

__all__ = [
    "__version__",
    "BACKEND",
    "SkyrmionError",
    "ParameterError",
    "DomainError",
    "OutOfRangeError",
    "ResolutionError",
    "RootBracketError",
    "LinearSolveError",
    "ConvergenceError",
    "StagnationError",
    "ModelParams",
    "energy_breakdown",
    "Profile",
    "RadialGrid",
    "build_grid",
    "SolveOptions",
    "SolveReport",
    "solve_newton",
    "continuation",
    "gradient_flow",
    "find_mu",
    "invert_relation",
    "perturbation_record",
]
