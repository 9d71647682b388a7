"""
Checking the adjoint gradient
=============================

The optimality residual obtained from the adjoint is the gradient of the
continuous problem, discretised afterwards. Compare it against central
finite differences of the discrete cost along random smooth directions,
and watch the mismatch shrink as the grid is refined.
"""

import numpy as np

from opinion_oc import CentringBoth, DensityPair, ModelParams, eval_cost, forward_solve, initial_density, make_mesh
from opinion_oc.sweep import reduced_gradient

params = ModelParams()
cost = CentringBoth()

for L, ds in ((40, 0.25), (80, 0.125), (160, 0.0625)):
    mesh = make_mesh(L, ds, 10.0)
    g = initial_density(0.85, 0.0, 10.0, mesh)
    g0 = DensityPair(g, g.copy())
    u0 = np.zeros((mesh.Q + 1, mesh.n_nodes))
    _, residual = reduced_gradient(forward_solve(params, g0, u0, mesh), u0, cost, params, mesh)

    rng = np.random.default_rng(0)
    errors = []
    for _ in range(5):
        a, b, c, d = rng.normal(size=4)
        du = np.sin(np.pi * (a * mesh.w + b))[None, :] * np.cos(np.pi * (c * mesh.times / mesh.T + d))[:, None]
        J = lambda u: eval_cost(cost, forward_solve(params, g0, u, mesh), u, mesh)
        fd = (J(u0 + 1e-4 * du) - J(u0 - 1e-4 * du)) / 2e-4
        adj = mesh.time_weights @ ((residual * du) @ mesh.weights)
        errors.append(abs(fd - adj) / abs(fd))
    print(f"L = {L:3d}: relative errors {np.round(errors, 4)}, median {np.median(errors):.4f}")
