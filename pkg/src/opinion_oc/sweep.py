"""Gradient sweeping loop: forward solve, backward solve, control update."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import costs
from .adjoint import AdjointTrajectory, adjoint_solve, nodal_derivative
from .forward import DensityPair, SolverError, StateTrajectory, forward_solve
from .kernels import ModelParams, Operators
from .mesh import Mesh

log = logging.getLogger(__name__)


@dataclass
class SweepOptions:
    # 0.5 overshoots badly on the centring presets (J triples in the first sweep)
    nu: float = 0.02
    tol: float = 1e-4
    max_iter: int = 100
    clamp: float | None = None
    # halve nu whenever one sweep raises J by more than this factor; None disables
    backstop: float | None = 1.1
    advection: str = "hybrid"
    nonlocal_sweeps: int = 30

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"step size must be positive, got {self.nu}")
        if not self.tol >= 0:
            raise ValueError(f"tolerance must be nonnegative, got {self.tol}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 0:
            raise ValueError(f"max_iter must be a nonnegative integer, got {self.max_iter}")
        if self.clamp is not None and not self.clamp > 0:
            raise ValueError(f"clamp bound must be positive, got {self.clamp}")


@dataclass
class SweepReport:
    iterations: int
    cost_history: list[float]
    final_state: StateTrajectory
    final_control: np.ndarray
    final_adjoint: AdjointTrajectory | None
    converged: bool
    step_sizes: list[float] = field(default_factory=list)


def optimality_residual(gL, gF, u, pL, cost, params: ModelParams, mesh: Mesh):
    """Gradient of the reduced cost with respect to the control, pointwise in (t, w).

    The control only enters the leader drift ``u/(2 tau_LL)``, so the state
    contribution is ``-(g_L / (2 tau_LL)) dp_L/dw``. Works on single time
    slices or on whole ``(Q + 1, L + 1)`` arrays.
    """
    dpL = nodal_derivative(pL, mesh.dw)
    return costs.grad_u_Js(cost, gL, gF, u, mesh) - np.asarray(gL) * dpL / (2.0 * params.tau_LL)


def update_control(u_prev, residual, nu: float, clamp: float | None = None):
    if not nu > 0:
        raise ValueError(f"step size must be positive, got {nu}")
    u_prev = np.asarray(u_prev, float)
    residual = np.asarray(residual, float)
    if u_prev.shape != residual.shape:
        raise ValueError(f"shape mismatch: control {u_prev.shape} vs residual {residual.shape}")
    u = u_prev - nu * residual
    if clamp is not None:
        u = np.clip(u, -clamp, clamp)
    return u


def reduced_gradient(traj, u, cost, params, mesh, ops=None, advection="hybrid", nonlocal_sweeps=30):
    """Adjoint trajectory and optimality residual on all time nodes for control ``u``."""
    adj = adjoint_solve(traj, u, cost, params, mesh, ops, advection, nonlocal_sweeps)
    return adj, optimality_residual(traj.gL, traj.gF, u, adj.pL, cost, params, mesh)


def sweep(params: ModelParams, g0: DensityPair, cost, mesh: Mesh,
          options: SweepOptions | None = None, u_init=None) -> SweepReport:
    """Run the sweeping algorithm from ``u_init`` (zero by default) until ``J`` settles."""
    opts = options or SweepOptions()
    ops = Operators(params, mesh)
    shape = (mesh.Q + 1, mesh.n_nodes)
    u = np.zeros(shape) if u_init is None else np.array(u_init, dtype=float)
    if u.shape != shape:
        raise ValueError(f"initial control must have shape {shape}")
    traj = forward_solve(params, g0, u, mesh, ops)
    J = costs.eval_cost(cost, traj, u, mesh)
    if not np.isfinite(J):
        raise SolverError("initial cost is not finite")
    history = [J]
    nus = []
    nu = opts.nu
    adj = None
    converged = False
    n = 0
    for n in range(1, opts.max_iter + 1):
        try:
            adj, res = reduced_gradient(traj, u, cost, params, mesh, ops, opts.advection, opts.nonlocal_sweeps)
            u = update_control(u, res, nu, opts.clamp)
            traj = forward_solve(params, g0, u, mesh, ops)
        except SolverError as exc:
            raise SolverError(f"sweep {n}: {exc}") from exc
        J_new = costs.eval_cost(cost, traj, u, mesh)
        if not np.isfinite(J_new):
            raise SolverError(f"sweep {n}: cost is not finite")
        nus.append(nu)
        history.append(J_new)
        log.info("sweep %d: J = %.10g (nu = %g)", n, J_new, nu)
        if opts.backstop is not None and J_new > opts.backstop * J:
            nu *= 0.5
            log.warning("sweep %d raised J from %.6g to %.6g; step size halved to %g", n, J, J_new, nu)
        done = abs(J_new - J) <= opts.tol * max(1.0, abs(J_new))
        J = J_new
        if done:
            converged = True
            break
    else:
        n = opts.max_iter
    return SweepReport(iterations=n, cost_history=history, final_state=traj, final_control=u,
                       final_adjoint=adj, converged=converged, step_sizes=nus)
