import numpy as np
import pytest

from opinion_oc import costs
from opinion_oc.forward import StateTrajectory
from opinion_oc.mesh import make_mesh, quad_trapezoid


def _traj(gL, gF):
    return StateTrajectory(np.array(gL, float), np.array(gF, float))


def all_costs(mesh, rng):
    tL = rng.random(mesh.n_nodes)
    tF = rng.random(mesh.n_nodes)
    return [costs.CentringBoth(-0.5, -0.3, 0.05), costs.CentringFollower(-0.5, 0.07),
            costs.FinalTimeBoth(tL, tF, 0.05), costs.FinalTimeFollower(tF, 0.1)]


def test_beta_must_be_positive():
    for make in (lambda b: costs.CentringBoth(beta=b), lambda b: costs.CentringFollower(beta=b),
                 lambda b: costs.FinalTimeFollower(np.zeros(3), b)):
        with pytest.raises(ValueError):
            make(0.0)


def test_eval_cost_examples():
    m = make_mesh(20, 0.1, 1.0)
    shape = (m.Q + 1, m.n_nodes)
    # follower spike at w_dF and no control
    i = 5
    gF = np.zeros(shape)
    gF[:, i] = 1.0 / m.weights[i]
    cost = costs.CentringFollower(w_dF=m.w[i])
    assert costs.eval_cost(cost, _traj(np.zeros(shape), gF), None, m) == pytest.approx(0.0, abs=1e-15)
    # perfect tracking
    g = np.tile(np.linspace(0.1, 1, m.n_nodes), (m.Q + 1, 1))
    cost = costs.FinalTimeBoth(g[-1].copy(), g[-1].copy())
    assert costs.eval_cost(cost, _traj(g, g), np.zeros(shape), m) == 0.0


def test_centring_follower_uniform():
    """Uniform g_F = 1/2 on T = 1: 1/2 * int (w + 0.5)^2 / 2 dw = 7/24."""
    for L, tol in ((100, 1e-4), (400, 1e-5)):
        m = make_mesh(L, 0.1, 1.0)
        g = np.full((m.Q + 1, m.n_nodes), 0.5)
        J = costs.eval_cost(costs.CentringFollower(-0.5), _traj(g, g), None, m)
        assert J == pytest.approx(7 / 24, abs=tol)


def test_final_time_control_penalty():
    m = make_mesh(10, 0.25, 1.0)
    g = np.ones((m.Q + 1, m.n_nodes))
    u = np.full_like(g, 2.0)
    cost = costs.FinalTimeFollower(np.ones(m.n_nodes), beta=0.05)
    # (beta/2) int int u^2 = 0.025 * 4 * 2 * 1
    assert costs.eval_cost(cost, _traj(g, g), u, m) == pytest.approx(0.2)


def test_grad_g_examples():
    m = make_mesh(4, 0.5, 2.0)
    gL, gF = costs.grad_g_Js(costs.CentringBoth(-0.5, -0.5, 0.05), None, None, 1.0, m)
    assert gL[2] == pytest.approx(0.15)
    _, gF = costs.grad_g_Js(costs.CentringFollower(w_dF=-0.5), None, None, 0.0, m)
    assert gF[1] == 0.0
    for c in (costs.FinalTimeBoth(np.ones(5), np.ones(5)), costs.FinalTimeFollower(np.ones(5))):
        a, b = costs.grad_g_Js(c, None, None, 3.0, m)
        assert not a.any() and not b.any()


def test_grad_u_examples():
    m = make_mesh(4, 0.5, 2.0)
    g = np.linspace(0.1, 0.5, 5)
    for c in (costs.CentringBoth(), costs.CentringFollower(), costs.FinalTimeFollower(g)):
        assert not costs.grad_u_Js(c, g, g, 0.0, m).any()
    np.testing.assert_allclose(costs.grad_u_Js(costs.FinalTimeFollower(g, 0.05), g, g, 2.0, m), 0.1)


def test_final_condition_examples():
    m = make_mesh(10, 0.1, 1.0)
    gI = costs.build_target_density(m)
    g = np.random.default_rng(0).random(m.n_nodes)
    for c in (costs.CentringBoth(), costs.CentringFollower()):
        a, b = costs.final_condition(c, g, g)
        assert not a.any() and not b.any()
    a, b = costs.final_condition(costs.FinalTimeBoth(gI, gI), gI, gI)
    assert not a.any() and not b.any()
    a, b = costs.final_condition(costs.FinalTimeFollower(gI), g, gI + 0.1)
    np.testing.assert_allclose(b, 0.1, atol=1e-15)
    assert not a.any()


def test_target_density():
    m = make_mesh(80, 0.125, 1.0)
    gI = costs.build_target_density(m)
    assert gI[0] == 0.0 and gI[-1] == 0.0
    P = costs.target_polynomial()
    for x, y in costs.TARGET_POINTS:
        assert P(x) == pytest.approx(y, abs=1e-12)
    # the nodes include -0.5, 0 and 0.5 exactly
    for x, y in costs.TARGET_POINTS:
        assert gI[np.argmin(np.abs(m.w - x))] == pytest.approx(y, abs=1e-12)
    # double roots at the ends
    assert P(1.0) == pytest.approx(0.0, abs=1e-14) and P.deriv()(-1.0) == pytest.approx(0.0, abs=1e-13)
    assert np.all(gI >= 0)
    # used as interpolated, without renormalisation
    assert 0.9 < quad_trapezoid(gI, m) < 0.95


# -- finite-difference consistency of the derivative objects ---------------------

def _random_state(m, rng):
    shape = (m.Q + 1, m.n_nodes)
    return rng.random(shape) + 0.1, rng.random(shape) + 0.1, rng.normal(size=shape)


@pytest.mark.parametrize("k", range(4))
def test_derivatives_match_finite_differences(k):
    m = make_mesh(12, 0.25, 1.0)
    rng = np.random.default_rng(100 + k)
    cost = all_costs(m, rng)[k]
    gL, gF, u = _random_state(m, rng)
    h = 1e-5

    def J(a, b, c):
        return costs.eval_cost(cost, _traj(a, b), c, m)

    for t, i in ((1, 3), (2, 7), (m.Q, 5), (0, 0)):
        tw, wi = m.time_weights[t], m.weights[i]
        dgL, dgF = costs.grad_g_Js(cost, gL[t], gF[t], u[t], m)
        du = costs.grad_u_Js(cost, gL[t], gF[t], u[t], m)
        fL, fF = costs.final_condition(cost, gL[-1], gF[-1])
        for which, grad, fin in ((0, dgL, fL), (1, dgF, fF)):
            ep = [gL.copy(), gF.copy()]
            em = [gL.copy(), gF.copy()]
            ep[which][t, i] += h
            em[which][t, i] -= h
            fd = (J(*ep, u) - J(*em, u)) / (2 * h)
            expect = tw * wi * grad[i] + (wi * fin[i] if t == m.Q else 0.0)
            assert fd == pytest.approx(expect, rel=1e-6, abs=1e-12)
        up, um = u.copy(), u.copy()
        up[t, i] += h
        um[t, i] -= h
        fd = (J(gL, gF, up) - J(gL, gF, um)) / (2 * h)
        assert fd == pytest.approx(tw * wi * du[i], rel=1e-6, abs=1e-12)


def test_eval_cost_shape_checks():
    m = make_mesh(10, 0.1, 1.0)
    g = np.ones((m.Q + 1, m.n_nodes))
    with pytest.raises(ValueError):
        costs.eval_cost(costs.CentringBoth(), _traj(g[:-1], g[:-1]), None, m)
    with pytest.raises(ValueError):
        costs.eval_cost(costs.CentringBoth(), _traj(g, g), np.zeros(3), m)
