import numpy as np
import pytest

from conftest import TAU, loop_monodromy, rel
from xyzbethe.bethe import dual_pre_bethe_vector, pre_bethe_vector
from xyzbethe.checks import Setup, check_rng, gauge_vacuum_actions
from xyzbethe.errors import GaugeSingularity
from xyzbethe.gauge import (
    GaugeParams,
    c_bar,
    dual_vacuum,
    gauge_det,
    gauge_matrix,
    gauge_matrix_inverse,
    gauge_monodromy,
    sample_gauge,
    vacuum,
)
from xyzbethe.vertex import ModelParams

P2 = ModelParams(2, TAU, (0.13 - 0.05j, -0.21 + 0.08j))
GP2 = GaugeParams(0.17 + 0.04j, -0.09 + 0.12j, P2)


def adjugate_inverse(m):
    a, b, c, d = m.ravel()
    return np.array([[d, -b], [-c, a]]) / (a * d - b * c)


def test_det_closed_form_independent_of_k():
    u = 0.11 - 0.2j
    for k in range(-5, 6):
        assert rel(np.linalg.det(gauge_matrix(k, u, GP2)), gauge_det(u, GP2)) < 1e-12


def test_inverse_matches_adjugate():
    u = 0.3 + 0.05j
    for k in (-2, 0, 3):
        assert rel(gauge_matrix_inverse(k, u, GP2), adjugate_inverse(gauge_matrix(k, u, GP2))) < 1e-13


def test_gauge_matrix_period():
    # at eta = 1/2, k -> k + 4 shifts s and t by 2, a period of the 2 tau thetas
    u = 0.1
    assert rel(gauge_matrix(0, u, GP2), gauge_matrix(4, u, GP2)) < 1e-14
    assert rel(gauge_matrix(0, u, GP2), gauge_matrix(2, u, GP2)) > 1e-3


def th(kind, u, scale=2):
    return P2.th(kind, u, scale)


def explicit_pre_bethe(l, u, gp):
    """N = 2, one operator: B_{l-1,l+1}(u) acting on the explicit vacuum."""
    xi = P2.xi
    T = loop_monodromy(u, P2)
    Mk = gauge_matrix(l - 1, u, gp)
    Ml = gauge_matrix(l + 1, u, gp)
    inv = adjugate_inverse(Mk)
    B = sum(inv[0, a] * T[a, b] * Ml[b, 1] for a in range(2) for b in range(2))
    s = lambda k: gp.s + k * 0.5
    site1 = np.array([th(1, s(l - 1) + xi[0]), th(4, s(l - 1) + xi[0])])
    site2 = np.array([th(1, s(l) + xi[1]), th(4, s(l) + xi[1])])
    return B @ np.kron(site1, site2)


def explicit_dual_pre_bethe(l, v, gp):
    xi = P2.xi
    T = loop_monodromy(v, P2)
    inv = adjugate_inverse(gauge_matrix(l - 1, v, gp))
    Ml = gauge_matrix(l + 1, v, gp)
    C = sum(inv[1, a] * T[a, b] * Ml[b, 0] for a in range(2) for b in range(2))
    t = lambda k: gp.t + k * 0.5
    site1 = np.array([-th(4, t(l) - xi[0]), th(1, t(l) - xi[0])])
    site2 = np.array([-th(4, t(l + 1) - xi[1]), th(1, t(l + 1) - xi[1])])
    return gp.gamma(l - 1) * gp.gamma(l + 1) * (np.kron(site1, site2) @ C)


@pytest.mark.parametrize("l", [0, 1, 2, 3, 5])
def test_pre_bethe_vector_oracle(l):
    u = 0.21 + 0.13j
    assert rel(pre_bethe_vector(l, [u], 0, GP2), explicit_pre_bethe(l, u, GP2)) < 1e-12
    assert rel(dual_pre_bethe_vector(l, [u], 0, GP2), explicit_dual_pre_bethe(l, u, GP2)) < 1e-12


def test_c_bar_normalisation():
    u = 0.05 + 0.2j
    ref = GP2.gamma(1) * GP2.gamma(3) * gauge_monodromy(1, 3, u, GP2).C
    assert rel(c_bar(1, 3, u, GP2), ref) < 1e-15


def test_vacuum_is_product_state():
    v = vacuum(2, GP2).amp.reshape(2, 2)
    assert np.linalg.matrix_rank(v, tol=1e-12) == 1
    w = dual_vacuum(2, GP2).amp.reshape(2, 2)
    assert np.linalg.matrix_rank(w, tol=1e-12) == 1


@pytest.mark.parametrize("N", [2, 4])
def test_vacuum_actions(N):
    setup = Setup(3, N, TAU)
    out = gauge_vacuum_actions(check_rng(3, "test.vacuum"), setup)
    assert out.residual < 1e-10, out.detail


def test_sample_gauge_deterministic():
    a = sample_gauge(P2, np.random.default_rng(7))
    b = sample_gauge(P2, np.random.default_rng(7))
    assert (a.s, a.t) == (b.s, b.t)
    assert max(abs(a.s.real), abs(a.s.imag), abs(a.t.real), abs(a.t.imag)) <= 0.4


def test_singular_gauge_rejected():
    # theta1(x) = 0 at x = 0
    with pytest.raises(GaugeSingularity):
        GaugeParams(0.1, -0.1, P2)
