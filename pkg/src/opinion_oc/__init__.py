"""Optimal control of leader/follower opinion dynamics on [-1, 1].

Modules: ``mesh`` (grids and quadrature), ``kernels`` (compromise kernels and
PDE coefficients), ``forward`` (Chang-Cooper / MPRK state solver), ``adjoint``
(backward solver), ``costs`` (cost functionals and derivatives), ``sweep``
(gradient sweeping loop), ``kinetic`` (Monte Carlo agent model), ``config``,
``runner`` and ``cli`` (presets, file output, command line).
"""

__version__ = "0.1.0"

from .mesh import Mesh, make_mesh, quad_trapezoid
from .kernels import BoundedConfidence, Constant, ModelParams, Sznajd
from .forward import DensityPair, SolverError, StateTrajectory, forward_solve, initial_density
from .adjoint import AdjointTrajectory, adjoint_solve
from .costs import CentringBoth, CentringFollower, FinalTimeBoth, FinalTimeFollower, eval_cost
from .sweep import SweepOptions, SweepReport, sweep

__all__ = [
    "Mesh", "make_mesh", "quad_trapezoid",
    "BoundedConfidence", "Constant", "ModelParams", "Sznajd",
    "DensityPair", "SolverError", "StateTrajectory", "forward_solve", "initial_density",
    "AdjointTrajectory", "adjoint_solve",
    "CentringBoth", "CentringFollower", "FinalTimeBoth", "FinalTimeFollower", "eval_cost",
    "SweepOptions", "SweepReport", "sweep",
]
