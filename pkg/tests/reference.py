"""Independent, deliberately naive reference solvers used as test oracles."""

import numpy as np


def nonlocal_op(kernel, x, v, g, weights):
    """``sum_j kernel(x_i, v_j) (x_i - v_j) g_j weights_j`` by explicit loops."""
    out = np.zeros(len(x))
    for i, xi in enumerate(x):
        s = 0.0
        for j, vj in enumerate(v):
            s += float(kernel(xi, vj)) * (xi - vj) * g[j] * weights[j]
        out[i] = s
    return out


def explicit_upwind(params, mesh, gL0, gF0, n_steps, ds, u=None):
    """Explicit Euler, first-order upwind fluxes, conservative dual-cell form.

    Solves ``g_s = (a g + (C g)_w)_w`` with velocity ``-a`` at interfaces and the
    diffusive flux from nodal differences of ``C g``. ``u`` is a function
    ``u(w, s)`` for the leader control.
    """
    w, wh, wts = mesh.w, mesh.w_half, mesh.weights
    D2 = (1 - w**2) ** (2 * params.D_alpha)
    CL = params.diffusion_L * D2
    CF = params.diffusion_F * D2
    gL, gF = np.array(gL0, float), np.array(gF0, float)
    # precompute kernel matrices at interfaces with the naive loop on unit vectors
    n = len(w)
    eye = np.eye(n)
    K = np.column_stack([nonlocal_op(params.P_L, wh, w, eye[j], wts) for j in range(n)])
    M = np.column_stack([nonlocal_op(params.P_tilde, wh, w, eye[j], wts) for j in range(n)])
    N = np.column_stack([nonlocal_op(params.P_F, wh, w, eye[j], wts) for j in range(n)])
    dw = mesh.dw
    for step in range(n_steps):
        s = step * ds
        uh = 0.0 if u is None else u(wh, s)
        aL = K @ gL / params.tau_LL + uh / (2 * params.tau_LL)
        aF = params.alpha_LF * (M @ gL / (2 * params.tau_FL) + N @ gF / params.tau_FF)
        new = []
        for g, a, C in ((gL, aL, CL), (gF, aF, CF)):
            vel = -a
            up = np.where(vel > 0, g[:-1], g[1:])
            flux = vel * up - (C[1:] * g[1:] - C[:-1] * g[:-1]) / dw
            div = np.zeros(n)
            div[:-1] += flux
            div[1:] -= flux
            new.append(g - ds * div / wts)
        gL, gF = new
    return gL, gF
