"""Numerical laboratory for ``u_t = Laplacian(log u)`` on the unit disk.

Closed-form solutions, an implicit solver for the conformal factor, the
potential / Harnack machinery and audits of the smoothing estimates.
"""
from .discretization import ConformalField, DiskGrid, RadialGrid
from .exact import CigarScaled, CigarUnscaled, ConstantSolution, Hyperbolic, MobiusPullback, Rescaled
from .geometry import DiskPoint, DomainError, MobiusMap, h
from .kernels import BACKEND
from .report import CheckReport
from .solver import AnnulusTrace, ExactTrace, FlowProblem, HyperbolicTrace, Trajectory, solve, step

__version__ = "0.1.0"

__all__ = [
    "AnnulusTrace", "BACKEND", "CheckReport", "CigarScaled", "CigarUnscaled", "ConformalField",
    "ConstantSolution", "DiskGrid", "DiskPoint", "DomainError", "ExactTrace", "FlowProblem",
    "Hyperbolic", "HyperbolicTrace", "MobiusMap", "MobiusPullback", "RadialGrid", "Rescaled",
    "Trajectory", "h", "solve", "step",
]
