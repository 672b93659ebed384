"""Traveling fronts and asymptotic profiles for reaction-diffusion equations
with a confining transverse potential or a heterogeneous reaction.

The package is organized bottom-up: reactions and grids, sparse operators,
principal eigenpairs, transverse profiles, slab fronts, time stepping and
the CSD model, with a command line on top (``rdfronts --help``).
"""
from .exceptions import (BracketError, ConfigError, ConvergenceError, InstabilityError, LinearSolveError,
                         MonotonicityError, RDFrontsError, SolverError)
from .geometry import Potential, SlabGrid, TransverseGrid, make_slab, make_transverse
from .nonlinearity import CSD, ConfinedLinear, Reaction

__version__ = "0.1.0"

__all__ = [
    "BracketError", "ConfigError", "ConvergenceError", "InstabilityError", "LinearSolveError",
    "MonotonicityError", "RDFrontsError", "SolverError", "Potential", "SlabGrid", "TransverseGrid",
    "make_slab", "make_transverse", "CSD", "ConfinedLinear", "Reaction",
]
