import numpy as np
import pytest

from opinion_oc.forward import DensityPair, initial_density
from opinion_oc.kernels import ModelParams
from opinion_oc.mesh import make_mesh


@pytest.fixture
def small_mesh():
    return make_mesh(20, 0.05, 1.0)


@pytest.fixture
def params():
    return ModelParams()


def reference_initial(mesh, R=0.85, c=0.0, k=10.0):
    g0 = initial_density(R, c, k, mesh)
    return DensityPair(g0, g0.copy())


def smooth_direction(rng, mesh):
    """Random smooth space-time perturbation ``sin(pi(a w + b)) cos(pi(c t/T + d))``."""
    a, b, c, d = rng.normal(size=4)
    return np.sin(np.pi * (a * mesh.w[None, :] + b)) * np.cos(np.pi * (c * mesh.times[:, None] / mesh.T + d))
