"""Compromise kernels, diffusion envelope and the Fokker-Planck coefficient fields.

The state system reads, per species,

    d/ds g = d/dw ( a[g, u] g + d/dw (C g) ),

with nonlocal drift ``a`` built from the interaction operators

    K[g](w) = int P(w, v) (w - v) g(v) dv

and ``C = c * D(w)^2`` with the envelope ``D(w) = (1 - w^2)^alpha``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import Mesh, quad_trapezoid

# pairs with |x - y| equal to r up to rounding count as outside the confidence band
_BAND_EPS = 1e-12


@dataclass(frozen=True)
class BoundedConfidence:
    r: float = 0.5

    def __post_init__(self):
        if not 0 < self.r <= 2:
            raise ValueError(f"confidence radius must lie in (0, 2], got {self.r}")

    def __call__(self, x, y):
        return (np.abs(np.subtract(x, y)) < self.r - _BAND_EPS).astype(float)


@dataclass(frozen=True)
class Sznajd:
    b: float = -1.0

    def __post_init__(self):
        if not -1 <= self.b <= 1:
            raise ValueError(f"Sznajd weight must lie in [-1, 1], got {self.b}")

    def __call__(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        return self.b * (1.0 - x**2)


@dataclass(frozen=True)
class Constant:
    c: float = 1.0

    def __post_init__(self):
        if not 0 <= self.c <= 1:
            raise ValueError(f"constant kernel must lie in [0, 1], got {self.c}")

    def __call__(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        return np.full(x.shape, float(self.c))


CompromiseKernel = BoundedConfidence | Sznajd | Constant


def eval_kernel(k: CompromiseKernel, x, y):
    out = k(x, y)
    return float(out) if np.ndim(out) == 0 else out


def diffusion_D(w, alpha: float = 2.0):
    return (1.0 - np.asarray(w, float) ** 2) ** alpha


def diffusion_D_prime(w, alpha: float = 2.0):
    w = np.asarray(w, float)
    return -2.0 * alpha * w * (1.0 - w**2) ** (alpha - 1.0)


@dataclass(frozen=True)
class ModelParams:
    """Fokker-Planck level parameters. Defaults are the reference experiment values."""

    tau_LL: float = 0.2
    tau_FL: float = 2.0
    tau_FF: float = 0.2
    lambda_L: float = 0.05
    lambda_F: float = 0.05
    alpha_LF: float = 1.0
    P_L: CompromiseKernel = field(default_factory=BoundedConfidence)
    P_F: CompromiseKernel = field(default_factory=BoundedConfidence)
    P_tilde: CompromiseKernel = field(default_factory=BoundedConfidence)
    D_alpha: float = 2.0

    def __post_init__(self):
        for name in ("tau_LL", "tau_FL", "tau_FF", "lambda_L", "lambda_F", "alpha_LF", "D_alpha"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive and finite, got {val!r}")

    @property
    def diffusion_L(self) -> float:
        return self.lambda_L / (2.0 * self.tau_LL)

    @property
    def diffusion_F(self) -> float:
        return self.lambda_F / (4.0 * self.tau_FL) + self.lambda_F / (2.0 * self.tau_FF)


def nonlocal_drift(kernel: CompromiseKernel, g, w, mesh: Mesh):
    """Trapezoid evaluation of ``int kernel(w, v) (w - v) g(v) dv`` at point(s) ``w``."""
    g = np.asarray(g, float)
    if g.shape != (mesh.n_nodes,):
        raise ValueError(f"expected {mesh.n_nodes} nodal values, got shape {g.shape}")
    w = np.asarray(w, float)
    v = mesh.w
    integrand = kernel(w[..., None], v) * (w[..., None] - v) * g
    out = quad_trapezoid(integrand, mesh)
    return float(out) if out.ndim == 0 else out


def interaction_matrix(kernel: CompromiseKernel, x, mesh: Mesh) -> np.ndarray:
    """Matrix ``M[i, j] = kernel(x_i, v_j) (x_i - v_j) * weight_j`` so ``M @ g`` is the operator at ``x``."""
    x = np.asarray(x, float)
    v = mesh.w
    return kernel(x[:, None], v[None, :]) * (x[:, None] - v[None, :]) * mesh.weights[None, :]


@dataclass
class Coefficients:
    """Drift ``a`` and diffusion ``C`` (with its w-derivative) per species at a set of points."""

    aL: np.ndarray
    aF: np.ndarray
    CL: np.ndarray
    CF: np.ndarray
    dCL: np.ndarray
    dCF: np.ndarray


class Operators:
    """Precomputed interaction matrices for one (params, mesh) pair.

    ``at`` is either ``"half"`` (cell interfaces, used by the state scheme)
    or ``"node"`` (used by the adjoint scheme).
    """

    def __init__(self, params: ModelParams, mesh: Mesh):
        self.params = params
        self.mesh = mesh
        self._mats = {}
        for where, x in (("half", mesh.w_half), ("node", mesh.w)):
            self._mats[where] = tuple(
                interaction_matrix(k, x, mesh) for k in (params.P_L, params.P_tilde, params.P_F)
            )
        self._env = {}
        for where, x in (("half", mesh.w_half), ("node", mesh.w)):
            D = diffusion_D(x, params.D_alpha)
            dD = diffusion_D_prime(x, params.D_alpha)
            self._env[where] = (D**2, 2.0 * D * dD)

    def drift(self, gL, gF, u, at: str = "half"):
        """Return ``(a_L, a_F)``; ``u`` is nodal and is averaged onto interfaces when ``at='half'``."""
        p = self.params
        K, M, N = self._mats[at]
        u = np.asarray(u, float)
        if u.ndim == 0:
            u = np.full(self.mesh.n_nodes, float(u))
        if at == "half":
            u = 0.5 * (u[1:] + u[:-1])
        aL = (K @ gL) / p.tau_LL + u / (2.0 * p.tau_LL)
        aF = p.alpha_LF * ((M @ gL) / (2.0 * p.tau_FL) + (N @ gF) / p.tau_FF)
        return aL, aF

    def diffusion(self, at: str = "half"):
        """Return ``(C_L, C_F, C_L', C_F')``."""
        p = self.params
        D2, dD2 = self._env[at]
        cL, cF = p.diffusion_L, p.diffusion_F
        return cL * D2, cF * D2, cL * dD2, cF * dD2

    def adjoint_source(self, gL, gF, dpL, dpF):
        """Nonlocal adjoint term: ``(kappa/tau_LL + alpha_LF mu/(2 tau_FL), alpha_LF nu/tau_FF)`` at nodes.

        ``kappa(v) = int P_L(w, v) (v - w) g_L(w) p_L'(w) dw`` and likewise
        ``mu`` (P_tilde against g_F, p_F') and ``nu`` (P_F against g_F, p_F').
        """
        p = self.params
        K, M, N = self._unweighted_node()
        wts = self.mesh.weights
        kappa = -(K.T @ (wts * gL * dpL))
        mu = -(M.T @ (wts * gF * dpF))
        nu = -(N.T @ (wts * gF * dpF))
        first = kappa / p.tau_LL + p.alpha_LF * mu / (2.0 * p.tau_FL)
        second = p.alpha_LF * nu / p.tau_FF
        return first, second

    def _unweighted_node(self):
        if not hasattr(self, "_unw"):
            w = self.mesh.w
            self._unw = tuple(
                k(w[:, None], w[None, :]) * (w[:, None] - w[None, :])
                for k in (self.params.P_L, self.params.P_tilde, self.params.P_F)
            )
        return self._unw


def assemble_coefficients(params: ModelParams, gL, gF, u, mesh: Mesh, ops: Operators | None = None,
                          at: str = "half") -> Coefficients:
    """Drift and diffusion fields of the state system at interfaces (default) or nodes."""
    ops = ops or Operators(params, mesh)
    aL, aF = ops.drift(np.asarray(gL, float), np.asarray(gF, float), u, at=at)
    CL, CF, dCL, dCF = ops.diffusion(at=at)
    return Coefficients(aL=aL, aF=aF, CL=CL, CF=CF, dCL=dCL, dCF=dCF)
