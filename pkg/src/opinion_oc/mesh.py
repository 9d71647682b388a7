"""Uniform opinion/time grids and trapezoid quadrature on I = [-1, 1]."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Mesh:
    """Uniform nodal grid on [-1, 1] with ``L`` cells and ``Q`` time steps of size ``ds``.

    Nodes are stored exactly antisymmetric (``w[L - i] == -w[i]``) so that
    mirror-symmetric data stays mirror-symmetric to the last bit.
    """

    L: int
    ds: float
    Q: int
    w: np.ndarray = field(repr=False, compare=False)
    w_half: np.ndarray = field(repr=False, compare=False)
    weights: np.ndarray = field(repr=False, compare=False)

    @property
    def dw(self) -> float:
        return 2.0 / self.L

    @property
    def T(self) -> float:
        return self.Q * self.ds

    @property
    def n_nodes(self) -> int:
        return self.L + 1

    @property
    def times(self) -> np.ndarray:
        return self.ds * np.arange(self.Q + 1)

    @property
    def time_weights(self) -> np.ndarray:
        """Trapezoid weights over the time nodes 0..Q."""
        tw = np.full(self.Q + 1, self.ds)
        tw[0] = tw[-1] = 0.5 * self.ds
        return tw

    @property
    def cell_widths(self) -> np.ndarray:
        """Dual-cell widths: ``dw`` inside, ``dw/2`` at the two boundary nodes."""
        return self.weights


def _antisymmetric(x):
    return 0.5 * (x - x[::-1])


def make_mesh(L: int, ds: float, T: float) -> Mesh:
    """Build the grid ``w_i = -1 + i*2/L`` and ``Q = floor(T/ds)`` time steps."""
    if int(L) != L or L < 2:
        raise ValueError(f"L must be an integer >= 2, got {L!r}")
    if not ds > 0 or not np.isfinite(ds):
        raise ValueError(f"ds must be positive, got {ds!r}")
    if not T > 0 or not np.isfinite(T):
        raise ValueError(f"T must be positive, got {T!r}")
    if T < ds:
        raise ValueError(f"T={T} is shorter than one time step ds={ds}")
    L = int(L)
    # tolerate T/ds landing a hair below an integer
    Q = int(math.floor(T / ds + 1e-9))
    dw = 2.0 / L
    w = _antisymmetric(-1.0 + dw * np.arange(L + 1))
    w[0], w[-1] = -1.0, 1.0
    w_half = _antisymmetric(-1.0 + dw * (np.arange(L) + 0.5))
    weights = np.full(L + 1, dw)
    weights[0] = weights[-1] = 0.5 * dw
    for arr in (w, w_half, weights):
        arr.setflags(write=False)
    return Mesh(L=L, ds=float(ds), Q=Q, w=w, w_half=w_half, weights=weights)


def quad_trapezoid(f, mesh: Mesh) -> float:
    """Trapezoid rule over the nodal grid."""
    f = np.asarray(f, dtype=float)
    if f.shape[-1] != mesh.n_nodes:
        raise ValueError(f"expected {mesh.n_nodes} nodal values, got {f.shape[-1]}")
    return f @ mesh.weights
