"""Positivity- and mass-preserving state solver.

Space: Chang-Cooper fluxes written as a production-destruction system.
Time: second-order modified Patankar-Runge-Kutta (MPRK22).

Each node owns a dual cell (width ``dw`` inside, ``dw/2`` at ``w = +-1``).
Production/destruction rates are exchanged between cell masses, so the
scheme conserves the trapezoid mass of each species exactly, up to the
round-off of the tridiagonal solves.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .kernels import ModelParams, Operators
from .mesh import Mesh, quad_trapezoid

log = logging.getLogger(__name__)

# below this |lam| the closed form loses digits to cancellation; use the Bernoulli series
_SERIES_CUTOFF = 0.1


class SolverError(RuntimeError):
    """Raised when a time step cannot be completed (singular system, NaN, ...)."""


@dataclass
class DensityPair:
    gL: np.ndarray
    gF: np.ndarray

    def masses(self, mesh: Mesh) -> tuple[float, float]:
        return quad_trapezoid(self.gL, mesh), quad_trapezoid(self.gF, mesh)


@dataclass
class StateTrajectory:
    """Leader/follower densities on all time nodes; arrays of shape ``(Q + 1, L + 1)``."""

    gL: np.ndarray
    gF: np.ndarray

    def __len__(self):
        return self.gL.shape[0]

    def __getitem__(self, t) -> DensityPair:
        return DensityPair(self.gL[t], self.gF[t])

    @property
    def final(self) -> DensityPair:
        return self[-1]


def chang_cooper_delta(lam):
    """Weight ``1/(1 - exp(lam)) + 1/lam``; the removable singularity at 0 gives 1/2."""
    lam = np.asarray(lam, dtype=float)
    out = np.empty_like(lam)
    small = np.abs(lam) < _SERIES_CUTOFF
    ls = lam[small]
    l2 = ls * ls
    out[small] = 0.5 - ls / 12.0 + ls * l2 * (1 / 720 - l2 * (1 / 30240 - l2 * (1 / 1209600 - l2 / 47900160)))
    lb = lam[~small]
    with np.errstate(over="ignore"):
        # -1/expm1 -> -0 for large positive lam, -> 1 for large negative lam
        out[~small] = -1.0 / np.expm1(lb) + 1.0 / lb
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def interface_exchange(g, a, C, dC, dw):
    """Mass exchange rates across each interior interface ``i+1/2``.

    Returns ``(to_left, to_right)``: the rate carried from node ``i+1`` into
    node ``i`` and from ``i`` into ``i+1``. Their difference is the
    Chang-Cooper flux ``F_{i+1/2}``.
    """
    alpha = a + dC
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(C > 0, alpha * dw / np.where(C > 0, C, 1.0), np.sign(alpha) * np.inf)
    lam = np.where(np.isnan(lam), 0.0, lam)
    delta = chang_cooper_delta(lam)
    blend = (1.0 - delta) * g[1:] + delta * g[:-1]
    to_left = np.maximum(alpha, 0.0) * blend + C * g[1:] / dw
    to_right = -np.minimum(alpha, 0.0) * blend + C * g[:-1] / dw
    return to_left, to_right


def pd_rates(g, a, C, mesh: Mesh, dC=None):
    """Production table ``p[i, j]`` (into ``i`` from ``j``) and destruction ``d[i, j] = p[j, i]``.

    Rates are per unit density of node ``i``: boundary rows are divided by
    the half-cell width. Only the neighbours ``j = i +- 1`` are nonzero and
    the fluxes through ``w = +-1`` are zero.
    """
    g = np.asarray(g, float)
    dC = np.zeros_like(C) if dC is None else dC
    to_left, to_right = interface_exchange(g, a, C, dC, mesh.dw)
    n = mesh.n_nodes
    p = np.zeros((n, n))
    idx = np.arange(n - 1)
    p[idx, idx + 1] = to_left
    p[idx + 1, idx] = to_right
    p /= mesh.cell_widths[:, None]
    return p, p.T * mesh.cell_widths[None, :] / mesh.cell_widths[:, None]


def _patankar_solve(m, m_ref, to_left, to_right, ds):
    """Solve ``x_i = m_i + ds * sum_j (P_ij x_j/m_ref_j - P_ji x_i/m_ref_i)`` for cell masses ``x``."""
    n = m.size
    ab = np.zeros((3, n))
    out_rate = np.zeros(n)
    out_rate[:-1] += to_right
    out_rate[1:] += to_left
    ab[1] = 1.0 + ds * out_rate / m_ref
    ab[0, 1:] = -ds * to_left / m_ref[1:]
    ab[2, :-1] = -ds * to_right / m_ref[:-1]
    try:
        x = solve_banded((1, 1), ab, m, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"Patankar system could not be solved: {exc}") from exc
    return x


def mprk2_step(g, rates_now, rates_stage, mesh: Mesh, ds: float | None = None):
    """One MPRK22 step for a single species.

    ``rates_now`` is ``(to_left, to_right)`` evaluated at ``g``; ``rates_stage``
    is a callable mapping the Euler-stage density to its rates (the stage
    density is only known after the first solve).
    """
    ds = mesh.ds if ds is None else ds
    g = np.asarray(g, float)
    if np.any(g <= 0):
        raise SolverError("MPRK step needs a strictly positive density")
    cw = mesh.cell_widths
    m = g * cw
    m_bar = _patankar_solve(m, m, *rates_now, ds)
    g_bar = m_bar / cw
    tl2, tr2 = rates_stage(g_bar)
    tl = 0.5 * (rates_now[0] + tl2)
    tr = 0.5 * (rates_now[1] + tr2)
    m_new = _patankar_solve(m, m_bar, tl, tr, ds)
    return m_new / cw


def mprk2_step_pair(gL, gF, u_now, u_next, ops: Operators, mesh: Mesh):
    """Advance both species one step; nonlocal coefficients are frozen per stage."""
    CL, CF, dCL, dCF = ops.diffusion("half")
    dw = mesh.dw
    cw = mesh.cell_widths
    ds = mesh.ds

    aL, aF = ops.drift(gL, gF, u_now, "half")
    rL = interface_exchange(gL, aL, CL, dCL, dw)
    rF = interface_exchange(gF, aF, CF, dCF, dw)
    mL, mF = gL * cw, gF * cw
    gLb = _patankar_solve(mL, mL, *rL, ds) / cw
    gFb = _patankar_solve(mF, mF, *rF, ds) / cw

    aLb, aFb = ops.drift(gLb, gFb, u_next, "half")
    rLb = interface_exchange(gLb, aLb, CL, dCL, dw)
    rFb = interface_exchange(gFb, aFb, CF, dCF, dw)
    gL_new = _patankar_solve(mL, gLb * cw, 0.5 * (rL[0] + rLb[0]), 0.5 * (rL[1] + rLb[1]), ds) / cw
    gF_new = _patankar_solve(mF, gFb * cw, 0.5 * (rF[0] + rFb[0]), 0.5 * (rF[1] + rFb[1]), ds) / cw
    return gL_new, gF_new


def initial_density(R: float, c: float, k: float, mesh: Mesh) -> np.ndarray:
    """Smoothed plateau ``tanh(k (R - |w - c|)) + 1`` normalised to unit trapezoid mass."""
    if not 0 < R < 1:
        raise ValueError(f"radius must lie in (0, 1), got {R}")
    if not -1 <= c <= 1:
        raise ValueError(f"centre must lie in [-1, 1], got {c}")
    if not k > 0:
        raise ValueError(f"sharpness must be positive, got {k}")
    h = np.tanh(k * (R - np.abs(mesh.w - c))) + 1.0
    mass = quad_trapezoid(h, mesh)
    if not mass > 0:
        raise SolverError("initial profile has zero mass")
    return h / mass


def _as_control(u, mesh: Mesh) -> np.ndarray:
    shape = (mesh.Q + 1, mesh.n_nodes)
    if u is None:
        return np.zeros(shape)
    u = np.asarray(u, float)
    if u.ndim == 0:
        return np.full(shape, float(u))
    if u.shape != shape:
        raise ValueError(f"control must have shape {shape}, got {u.shape}")
    return u


def forward_solve(params: ModelParams, g0: DensityPair, u, mesh: Mesh,
                  ops: Operators | None = None) -> StateTrajectory:
    """Integrate the state system over all ``Q`` steps of ``mesh``.

    ``u`` is the leader control on (time node, space node), shape
    ``(Q + 1, L + 1)``; ``None`` means no control. The Euler stage of step
    ``t`` sees ``u[t]``, the corrector stage ``u[t + 1]``.
    """
    ops = ops or Operators(params, mesh)
    u = _as_control(u, mesh)
    n = mesh.n_nodes
    gL = np.empty((mesh.Q + 1, n))
    gF = np.empty((mesh.Q + 1, n))
    gL[0], gF[0] = np.asarray(g0.gL, float), np.asarray(g0.gF, float)
    if gL[0].shape != (n,) or gF[0].shape != (n,):
        raise ValueError("initial densities do not match the mesh")
    if np.any(gL[0] <= 0) or np.any(gF[0] <= 0):
        raise SolverError("initial densities must be strictly positive")
    for t in range(mesh.Q):
        gL[t + 1], gF[t + 1] = mprk2_step_pair(gL[t], gF[t], u[t], u[t + 1], ops, mesh)
        if not (np.all(np.isfinite(gL[t + 1])) and np.all(np.isfinite(gF[t + 1]))):
            raise SolverError(f"non-finite density after step {t + 1}")
    return StateTrajectory(gL=gL, gF=gF)
