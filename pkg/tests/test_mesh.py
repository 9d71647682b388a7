import numpy as np
import pytest
from hypothesis import given, strategies as st

from opinion_oc.mesh import make_mesh, quad_trapezoid


def test_reference_mesh():
    m = make_mesh(80, 0.125, 10.0)
    assert m.dw == pytest.approx(0.025)
    assert m.Q == 80
    assert m.T == pytest.approx(10.0)


def test_smallest_symmetric_grid():
    m = make_mesh(2, 1.0, 1.0)
    np.testing.assert_array_equal(m.w, [-1.0, 0.0, 1.0])
    assert m.Q == 1


def test_four_cell_grid():
    m = make_mesh(4, 0.5, 2.0)
    np.testing.assert_allclose(m.w, [-1, -0.5, 0, 0.5, 1], atol=1e-15)
    assert m.Q == 4


@pytest.mark.parametrize("L,ds,T", [(1, 0.1, 1), (2.5, 0.1, 1), (4, 0, 1), (4, -1, 1), (4, 0.5, 0.1), (4, 0.1, np.nan)])
def test_invalid_mesh(L, ds, T):
    with pytest.raises(ValueError):
        make_mesh(L, ds, T)


def test_quadrature_examples():
    m = make_mesh(4, 0.5, 2.0)
    assert quad_trapezoid(np.ones(5), m) == pytest.approx(2.0)
    assert quad_trapezoid(m.w, m) == pytest.approx(0.0, abs=1e-15)
    # brute-force trapezoid sum of w^2 on {-1, -.5, 0, .5, 1}
    brute = sum(0.5 * (m.w[i] ** 2 + m.w[i + 1] ** 2) * 0.5 for i in range(4))
    assert quad_trapezoid(m.w**2, m) == pytest.approx(brute) == pytest.approx(0.75)


def test_quadrature_length_mismatch():
    m = make_mesh(4, 0.5, 2.0)
    with pytest.raises(ValueError):
        quad_trapezoid(np.ones(4), m)


@given(half=st.integers(1, 200), ds=st.floats(1e-3, 1.0), steps=st.integers(1, 50))
def test_mesh_invariants(half, ds, steps):
    L = 2 * half
    T = ds * steps
    m = make_mesh(L, ds, T)
    assert m.w[0] == -1.0 and m.w[-1] == 1.0
    d = np.diff(m.w)
    assert np.all(d > 0)
    np.testing.assert_allclose(d, m.dw, rtol=1e-9)
    # symmetric grid containing 0
    np.testing.assert_array_equal(m.w, -m.w[::-1])
    assert m.w[half] == 0.0
    assert m.Q == steps
    assert quad_trapezoid(np.ones(L + 1), m) == pytest.approx(2.0)
    assert m.time_weights.sum() == pytest.approx(m.T)


@given(half=st.integers(1, 100))
def test_odd_integrand_vanishes(half):
    m = make_mesh(2 * half, 0.1, 1.0)
    assert abs(quad_trapezoid(m.w**3 - m.w, m)) < 1e-14
