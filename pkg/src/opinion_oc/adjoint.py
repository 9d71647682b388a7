"""Backward solver for the adjoint of the state system.

Per species the adjoint satisfies

    dp/ds = -grad_g J_s + a dp/dw - C d2p/dw2 - A*[g, dp/dw],

marched from ``p(T) = grad_g J_T`` back to ``s = 0`` with an implicit Euler
step. Space uses central second differences and, for the drift, central
differences where the cell Peclet number allows it and upwinding elsewhere
(``advection="upwind"`` forces upwinding everywhere). The nonlocal ``A*``
term is made implicit by fixed-point sweeps; with ``nonlocal_sweeps=0`` it
is explicit in ``p^{t+1}``. At ``w = +-1`` the adjoint has zero slope.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from . import costs
from .forward import SolverError, StateTrajectory, _as_control
from .kernels import ModelParams, Operators
from .mesh import Mesh


@dataclass
class AdjointPair:
    pL: np.ndarray
    pF: np.ndarray


@dataclass
class AdjointTrajectory:
    """Adjoint on all time nodes; arrays of shape ``(Q + 1, L + 1)``."""

    pL: np.ndarray
    pF: np.ndarray

    def __len__(self):
        return self.pL.shape[0]

    def __getitem__(self, t) -> AdjointPair:
        return AdjointPair(self.pL[t], self.pF[t])


def nodal_derivative(p, dw: float) -> np.ndarray:
    """Central differences inside, first-order one-sided at the two ends."""
    p = np.asarray(p, float)
    dp = np.empty_like(p)
    dp[..., 1:-1] = (p[..., 2:] - p[..., :-2]) / (2.0 * dw)
    dp[..., 0] = (p[..., 1] - p[..., 0]) / dw
    dp[..., -1] = (p[..., -1] - p[..., -2]) / dw
    return dp


def astar_kernels(gL, gF, dpL, dpF, params: ModelParams, mesh: Mesh, ops: Operators | None = None):
    """Both components of the nonlocal adjoint operator at the nodes."""
    for arr in (gL, gF, dpL, dpF):
        if np.shape(arr) != (mesh.n_nodes,):
            raise ValueError(f"expected {mesh.n_nodes} nodal values, got shape {np.shape(arr)}")
    ops = ops or Operators(params, mesh)
    return ops.adjoint_source(np.asarray(gL, float), np.asarray(gF, float),
                              np.asarray(dpL, float), np.asarray(dpF, float))


def adjoint_matrix(a, C, ds: float, dw: float, advection: str = "hybrid") -> np.ndarray:
    """Banded (1, 1) storage of the implicit operator ``I + ds (a d/dw - C d2/dw2)`` for one species.

    With ``advection="upwind"`` row ``i`` reads ``(ds/dw k- - ds/dw^2 C) p_{i+1}
    + (1 + 2 ds/dw^2 C + ds/dw (k+ - k-)) p_i + (-ds/dw k+ - ds/dw^2 C) p_{i-1}``
    with ``k+- = max/min(0, a_i)``. ``"hybrid"`` switches to central
    differences wherever the cell Peclet number ``|a| dw / (2 C)`` is at most
    one, which keeps the matrix an M-matrix. Out-of-range neighbours are
    mirrored onto the boundary node (zero normal derivative).
    """
    if advection not in ("upwind", "hybrid"):
        raise ValueError(f"unknown advection stencil {advection!r}")
    a = np.asarray(a, float)
    C = np.asarray(C, float)
    kp = np.maximum(a, 0.0)
    km = np.minimum(a, 0.0)
    if advection == "hybrid":
        central = np.abs(a) * dw <= 2.0 * C
        kp = np.where(central, 0.5 * a, kp)
        km = np.where(central, 0.5 * a, km)
    r1, r2 = ds / dw, ds / dw**2
    upper = r1 * km - r2 * C
    diag = 1.0 + 2.0 * r2 * C + r1 * (kp - km)
    lower = -r1 * kp - r2 * C
    diag = diag.copy()
    diag[0] += lower[0]
    diag[-1] += upper[-1]
    ab = np.zeros((3, a.size))
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    return ab


def banded_to_dense(ab) -> np.ndarray:
    n = ab.shape[1]
    return np.diag(ab[1]) + np.diag(ab[0, 1:], 1) + np.diag(ab[2, :-1], -1)


def _solve(ab, rhs):
    try:
        return solve_banded((1, 1), ab, rhs)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"adjoint system could not be solved: {exc}") from exc


def adjoint_step(p_next: AdjointPair, gL, gF, u_t, cost, params: ModelParams, mesh: Mesh,
                 ops: Operators | None = None, advection: str = "hybrid",
                 nonlocal_sweeps: int = 30, rtol: float = 1e-13) -> AdjointPair:
    """One backward step from time node ``t + 1`` to ``t`` using the state at ``t``.

    Each species solves the tridiagonal system
    ``(I + ds (a d/dw - C d2/dw2)) p^t = p^{t+1} + ds (grad_g J_s + A*[g^t, dp/dw])``.
    The nonlocal ``A*`` term is first taken from ``p^{t+1}`` (the
    semi-implicit step, ``nonlocal_sweeps=0``) and then refreshed with the
    new ``p^t`` for up to ``nonlocal_sweeps`` fixed-point passes, which
    converges to the fully implicit step.
    """
    ops = ops or Operators(params, mesh)
    ds, dw = mesh.ds, mesh.dw
    aL, aF = ops.drift(gL, gF, u_t, at="node")
    CL, CF, _, _ = ops.diffusion(at="node")
    sL, sF = costs.grad_g_Js(cost, gL, gF, u_t, mesh)
    abL = adjoint_matrix(aL, CL, ds, dw, advection)
    abF = adjoint_matrix(aF, CF, ds, dw, advection)
    pL, pF = p_next.pL, p_next.pF
    for sweep in range(nonlocal_sweeps + 1):
        nlL, nlF = ops.adjoint_source(gL, gF, nodal_derivative(pL, dw), nodal_derivative(pF, dw))
        newL = _solve(abL, p_next.pL + ds * (sL + nlL))
        newF = _solve(abF, p_next.pF + ds * (sF + nlF))
        change = max(np.max(np.abs(newL - pL)), np.max(np.abs(newF - pF)))
        scale = max(np.max(np.abs(newL)), np.max(np.abs(newF)), 1e-300)
        pL, pF = newL, newF
        if sweep > 0 and change <= rtol * scale:
            break
    return AdjointPair(pL, pF)


def adjoint_solve(traj: StateTrajectory, u, cost, params: ModelParams, mesh: Mesh,
                  ops: Operators | None = None, advection: str = "hybrid",
                  nonlocal_sweeps: int = 30) -> AdjointTrajectory:
    """March the adjoint from the final-time condition back to ``t = 0``."""
    ops = ops or Operators(params, mesh)
    u = _as_control(u, mesh)
    pL = np.empty_like(traj.gL)
    pF = np.empty_like(traj.gF)
    pL[-1], pF[-1] = costs.final_condition(cost, traj.gL[-1], traj.gF[-1])
    for t in range(mesh.Q - 1, -1, -1):
        step = adjoint_step(AdjointPair(pL[t + 1], pF[t + 1]), traj.gL[t], traj.gF[t], u[t],
                            cost, params, mesh, ops, advection, nonlocal_sweeps)
        if not (np.all(np.isfinite(step.pL)) and np.all(np.isfinite(step.pF))):
            raise SolverError(f"non-finite adjoint at time node {t}")
        pL[t], pF[t] = step.pL, step.pF
    return AdjointTrajectory(pL=pL, pF=pF)
