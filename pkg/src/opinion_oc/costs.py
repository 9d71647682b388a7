"""Cost functionals and the derivative objects the optimality system needs.

Four functionals are supported:

* ``CentringBoth``     -- 1/2 int int (|w - wdL|^2 + beta u^2) gL + (|w - wdF|^2 + beta u^2) gF
* ``CentringFollower`` -- 1/2 int int (|w - wdF|^2 + beta u^2) gF
* ``FinalTimeBoth``    -- 1/2 int |g(T) - g_target|^2 + beta/2 int int u^2
* ``FinalTimeFollower``-- same, follower component only

Space and time integrals use the trapezoid rule on the mesh nodes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .mesh import Mesh

log = logging.getLogger(__name__)


def _check_beta(beta):
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")


@dataclass(frozen=True)
class CentringBoth:
    w_dL: float = -0.5
    w_dF: float = -0.5
    beta: float = 0.05

    def __post_init__(self):
        _check_beta(self.beta)


@dataclass(frozen=True)
class CentringFollower:
    w_dF: float = -0.5
    beta: float = 0.05

    def __post_init__(self):
        _check_beta(self.beta)


@dataclass(frozen=True, eq=False)
class FinalTimeBoth:
    g_target_L: np.ndarray
    g_target_F: np.ndarray
    beta: float = 0.05

    def __post_init__(self):
        _check_beta(self.beta)


@dataclass(frozen=True, eq=False)
class FinalTimeFollower:
    g_target: np.ndarray
    beta: float = 0.05

    def __post_init__(self):
        _check_beta(self.beta)


CostSpec = CentringBoth | CentringFollower | FinalTimeBoth | FinalTimeFollower


def _running_integrands(cost, w, gL, gF, u):
    """Pointwise running cost density; broadcasts over leading time axes."""
    b = cost.beta
    if isinstance(cost, CentringBoth):
        return 0.5 * (((w - cost.w_dL) ** 2 + b * u**2) * gL + ((w - cost.w_dF) ** 2 + b * u**2) * gF)
    if isinstance(cost, CentringFollower):
        return 0.5 * ((w - cost.w_dF) ** 2 + b * u**2) * gF
    if isinstance(cost, (FinalTimeBoth, FinalTimeFollower)):
        return 0.5 * b * u**2 + 0.0 * gL
    raise TypeError(f"unknown cost specification {cost!r}")


def terminal_cost(cost, gL_T, gF_T, mesh: Mesh) -> float:
    if isinstance(cost, FinalTimeBoth):
        dev = (gL_T - cost.g_target_L) ** 2 + (gF_T - cost.g_target_F) ** 2
        return 0.5 * float(dev @ mesh.weights)
    if isinstance(cost, FinalTimeFollower):
        return 0.5 * float(((gF_T - cost.g_target) ** 2) @ mesh.weights)
    return 0.0


def running_cost(cost, traj, u, mesh: Mesh) -> float:
    u = np.zeros_like(traj.gL) if u is None else np.asarray(u, float)
    dens = _running_integrands(cost, mesh.w, traj.gL, traj.gF, u)
    return float(mesh.time_weights @ (dens @ mesh.weights))


def eval_cost(cost, traj, u, mesh: Mesh) -> float:
    """Total cost ``J = J_T + J_s`` of a trajectory/control pair."""
    if traj.gL.shape != (mesh.Q + 1, mesh.n_nodes):
        raise ValueError("trajectory does not match the mesh")
    if u is not None and np.shape(u) != traj.gL.shape:
        raise ValueError("control does not match the trajectory")
    return terminal_cost(cost, traj.gL[-1], traj.gF[-1], mesh) + running_cost(cost, traj, u, mesh)


def grad_g_Js(cost, gL, gF, u, mesh: Mesh):
    """Pointwise derivative of the running-cost density with respect to ``(gL, gF)``."""
    w = mesh.w
    u = np.asarray(u, float) * np.ones_like(w)
    zero = np.zeros_like(w)
    b = cost.beta
    if isinstance(cost, CentringBoth):
        return 0.5 * ((w - cost.w_dL) ** 2 + b * u**2), 0.5 * ((w - cost.w_dF) ** 2 + b * u**2)
    if isinstance(cost, CentringFollower):
        return zero, 0.5 * ((w - cost.w_dF) ** 2 + b * u**2)
    if isinstance(cost, (FinalTimeBoth, FinalTimeFollower)):
        return zero, zero.copy()
    raise TypeError(f"unknown cost specification {cost!r}")


def grad_u_Js(cost, gL, gF, u, mesh: Mesh):
    """Pointwise derivative of the running-cost density with respect to the control."""
    u = np.asarray(u, float) * np.ones(mesh.n_nodes)
    b = cost.beta
    if isinstance(cost, CentringBoth):
        return b * u * (np.asarray(gL) + np.asarray(gF))
    if isinstance(cost, CentringFollower):
        return b * u * np.asarray(gF)
    if isinstance(cost, (FinalTimeBoth, FinalTimeFollower)):
        return b * u
    raise TypeError(f"unknown cost specification {cost!r}")


def final_condition(cost, gL_T, gF_T):
    """Adjoint data at the final time, the gradient of ``J_T``."""
    gL_T, gF_T = np.asarray(gL_T, float), np.asarray(gF_T, float)
    if isinstance(cost, FinalTimeBoth):
        return gL_T - cost.g_target_L, gF_T - cost.g_target_F
    if isinstance(cost, FinalTimeFollower):
        return np.zeros_like(gL_T), gF_T - cost.g_target
    return np.zeros_like(gL_T), np.zeros_like(gF_T)


# interpolation data for the tracking target: g(-1) = g(1) = 0 (double roots) plus three values
TARGET_POINTS = ((-0.5, 0.5), (0.0, 0.25), (0.5, 1.0))


def target_polynomial(points=TARGET_POINTS) -> np.polynomial.Polynomial:
    """Degree-6 polynomial ``(1 - w^2)^2 q(w)`` through ``points``, ``q`` quadratic."""
    x = np.array([p[0] for p in points], float)
    y = np.array([p[1] for p in points], float)
    q = np.linalg.solve(np.vander(x, 3, increasing=True), y / (1.0 - x**2) ** 2)
    bubble = np.polynomial.Polynomial([1.0, 0.0, -1.0]) ** 2
    return bubble * np.polynomial.Polynomial(q)


def build_target_density(mesh: Mesh, points=TARGET_POINTS) -> np.ndarray:
    """Tracking target on the nodes; used as interpolated (no renormalisation)."""
    vals = target_polynomial(points)(mesh.w)
    vals[0] = vals[-1] = 0.0
    if np.any(vals < 0):
        log.warning("target interpolant negative at %d nodes; clipped to 0", int(np.sum(vals < 0)))
        vals = np.maximum(vals, 0.0)
    return vals
