import numpy as np
import pytest
from hypothesis import given, strategies as st

from opinion_oc.kernels import (BoundedConfidence, Constant, ModelParams, Operators, Sznajd,
                                assemble_coefficients, diffusion_D, diffusion_D_prime,
                                eval_kernel, nonlocal_drift)
from opinion_oc.mesh import make_mesh

from reference import nonlocal_op

unit = st.floats(-1, 1)


def test_kernel_examples():
    assert eval_kernel(BoundedConfidence(0.5), 0.0, 0.3) == 1.0
    assert eval_kernel(BoundedConfidence(0.5), 0.0, 0.6) == 0.0
    for x in (-1.0, 1.0):
        for y in (-1.0, 0.0, 0.7):
            assert eval_kernel(Sznajd(-1.0), x, y) == 0.0
    assert eval_kernel(Sznajd(-1.0), 0.5, 0.1) == pytest.approx(-0.75)
    assert eval_kernel(Constant(1.0), 0.2, -0.9) == 1.0


def test_band_edge_excluded():
    assert eval_kernel(BoundedConfidence(0.5), 0.0, 0.5) == 0.0
    assert eval_kernel(BoundedConfidence(0.5), -0.25, 0.25) == 0.0


@given(x=unit, y=unit, r=st.floats(0.01, 2.0), b=st.floats(-1, 1))
def test_kernel_ranges(x, y, r, b):
    assert eval_kernel(BoundedConfidence(r), x, y) in (0.0, 1.0)
    s = eval_kernel(Sznajd(b), x, y)
    assert abs(s) <= 1.0
    assert s == pytest.approx(b * (1 - x * x))


def test_invalid_kernels():
    with pytest.raises(ValueError):
        BoundedConfidence(0.0)
    with pytest.raises(ValueError):
        Sznajd(1.5)


def test_envelope_examples():
    assert diffusion_D(0.0) == 1.0
    assert diffusion_D(1.0) == 0.0 and diffusion_D(-1.0) == 0.0
    assert diffusion_D(0.5) == pytest.approx(0.5625)


@given(w=st.floats(-0.99, 0.99), alpha=st.floats(1.0, 3.0))
def test_envelope_derivative(w, alpha):
    h = 1e-6
    fd = (diffusion_D(w + h, alpha) - diffusion_D(w - h, alpha)) / (2 * h)
    assert diffusion_D_prime(w, alpha) == pytest.approx(fd, rel=1e-5, abs=1e-8)


def test_params_defaults_and_validation():
    p = ModelParams()
    assert (p.tau_LL, p.tau_FL, p.tau_FF, p.lambda_L, p.lambda_F) == (0.2, 2.0, 0.2, 0.05, 0.05)
    for bad in ("tau_LL", "tau_FL", "tau_FF", "lambda_L", "lambda_F"):
        with pytest.raises(ValueError, match=bad):
            ModelParams(**{bad: -1.0})
        with pytest.raises(ValueError):
            ModelParams(**{bad: 0.0})


def test_constant_kernel_uniform_density():
    m = make_mesh(80, 0.1, 1.0)
    g = np.full(m.n_nodes, 0.5)
    # int (w - v)/2 dv = w, exact for the trapezoid rule (linear integrand)
    np.testing.assert_allclose(nonlocal_drift(Constant(1.0), g, m.w, m), m.w, atol=1e-13)
    even = np.exp(-(m.w**2))
    assert abs(nonlocal_drift(Constant(1.0), even, 0.0, m)) < 1e-15


def test_spike_density():
    m = make_mesh(20, 0.1, 1.0)
    k = 7
    g = np.zeros(m.n_nodes)
    g[k] = 1.0 / m.weights[k]
    x = np.array([-0.3, 0.1, 0.45])
    k_BC = BoundedConfidence(0.5)
    np.testing.assert_allclose(nonlocal_drift(k_BC, g, x, m), k_BC(x, m.w[k]) * (x - m.w[k]), atol=1e-14)


def test_nonlocal_matches_naive_loop():
    m = make_mesh(16, 0.1, 1.0)
    rng = np.random.default_rng(3)
    g = rng.random(m.n_nodes)
    for k in (BoundedConfidence(0.5), Sznajd(-1.0), Constant(0.7)):
        np.testing.assert_allclose(nonlocal_drift(k, g, m.w_half, m),
                                   nonlocal_op(k, m.w_half, m.w, g, m.weights), atol=1e-14)


def test_drift_examples():
    m = make_mesh(20, 0.1, 1.0)
    p = ModelParams(P_L=Constant(1.0))
    ops = Operators(p, m)
    g = np.exp(-4 * m.w**2)
    aL, _ = ops.drift(g, g, 0.0, at="node")
    np.testing.assert_allclose(aL, nonlocal_drift(Constant(1.0), g, m.w, m) / p.tau_LL, atol=1e-14)
    u = 0.3 + m.w**2
    aL, _ = ops.drift(g, g, u, at="node")
    assert aL[10] == pytest.approx(u[10] / (2 * p.tau_LL), abs=1e-14)


def test_table_diffusion_at_centre():
    m = make_mesh(80, 0.125, 10.0)
    c = assemble_coefficients(ModelParams(), np.ones(81), np.ones(81), 0.0, m, at="node")
    assert c.CL[40] == pytest.approx(0.125)
    assert ModelParams().diffusion_L == pytest.approx(0.05 / 0.4)


def test_half_node_control_average():
    m = make_mesh(10, 0.1, 1.0)
    p = ModelParams()
    ops = Operators(p, m)
    g = np.ones(m.n_nodes)
    u = np.linspace(-1, 1, m.n_nodes) ** 3
    a_with, _ = ops.drift(g, g, u, "half")
    a_without, _ = ops.drift(g, g, 0.0, "half")
    np.testing.assert_allclose(a_with - a_without, 0.5 * (u[1:] + u[:-1]) / (2 * p.tau_LL), atol=1e-14)
