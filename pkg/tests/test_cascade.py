import numpy as np
import pytest

from conftest import rel
from xyzbethe import cascade, scalar
from xyzbethe.checks import check_rng
from xyzbethe import checks as registry


@pytest.fixture
def offshell(setup4, rng):
    def make(m):
        return scalar.sample_offshell(rng, m, setup4.gp, avoid=setup4.vbar)

    return make


def test_cauchy_inverse_vs_numpy(setup4, rng):
    p = setup4.params
    xs = list(rng.uniform(-0.5, 0.5, 3) + 1j * rng.uniform(-0.3, 0.3, 3))
    ys = list(rng.uniform(-0.5, 0.5, 3) + 1j * rng.uniform(-0.3, 0.3, 3))
    lam = 0.2 + 0.15j
    ref = np.linalg.inv(cascade.cauchy_matrix(xs, ys, lam, p))
    assert rel(cascade.cauchy_inverse(xs, ys, lam, p), ref) < 1e-10


def test_a_and_b_inverses_vs_numpy(setup4, offshell):
    vs, gp = setup4.vbar, setup4.gp
    n = len(vs)
    us = offshell(n - 1)
    A = cascade.a_matrix(vs, us, gp)[:, : n - 1]
    B = cascade.b_matrix(vs, us, gp)[: n - 1, :]
    assert rel(cascade.a_inverse(vs, us, gp), np.linalg.inv(A)) < 1e-9
    assert rel(cascade.b_inverse(vs, us, gp), np.linalg.inv(B)) < 1e-9


def test_omega_product_factorisation(setup4, offshell):
    vs, gp = setup4.vbar, setup4.gp
    r = cascade.om_product_identity(vs, offshell(len(vs) + 1), gp)
    assert r["omom"] < 1e-9
    assert r["hh_res"] < 1e-10


def test_rank_bound(setup4, offshell):
    r = cascade.om_product_identity(setup4.vbar, offshell(len(setup4.vbar) + 3), setup4.gp)
    assert r["rank_excess"] < 1e-9


def test_h_sum_matches_residues(setup4, offshell):
    vs, gp = setup4.vbar, setup4.gp
    us = offshell(len(vs) + 1)
    for j in range(len(us)):
        for k in range(len(us)):
            assert rel(cascade.h_sum(j, k, vs, us, gp), cascade.h_residue(j, k, vs, us, gp)) < 1e-10


def test_rank_one_trace(setup4, offshell):
    r = cascade.rank_one_trace(setup4.vbar, offshell(len(setup4.vbar) - 1), setup4.gp)
    assert r["closed_vs_assembly"] < 1e-8
    assert r["degenerate_limit"] < 1e-6
    assert abs(r["assembly"]) > 1e-6


def test_contour_identities(setup4, offshell):
    r = cascade.contour_sum_calA(setup4.vbar, offshell(len(setup4.vbar) - 1), setup4.gp)
    assert r["jaj1"] < 1e-10
    assert max(r["calA_closed_vs_matrix"], r["calA_g_vs_matrix"], r["calB_closed_vs_matrix"]) < 1e-9


def test_direct_expression(setup4, offshell):
    s = setup4
    for m in (1, 3):
        assert cascade.direct_expression_residual(s.nu_s, s.vbar, offshell(m), s.gp) < 1e-8


def test_direct_expression_vs_brute_force(setup4, offshell):
    s = setup4
    us = offshell(3)
    for lam in (s.nu_s + 1, s.nu_s + 3):
        ref = scalar.brute_force_sp(s.nu_s, s.vbar, lam, us, s.gp)
        assert rel(cascade.direct_expression(s.nu_s, lam, s.vbar, us, s.gp), ref) < 1e-7


@pytest.mark.parametrize(
    "fn,tol",
    [
        (registry.cascade_sandwich, 1e-8),
        (registry.cascade_trivial_solution, 1e-10),
        (registry.cascade_x_independence, 1e-9),
        (registry.cascade_zero_propagation, 1e-8),
    ],
)
def test_cascade_system(setup4, fn, tol):
    out = fn(check_rng(11, fn.__name__), setup4)
    assert out.structure_ok and out.residual < tol


def test_zero_eigenvectors(setup4):
    out = registry.cascade_zero_eigenvectors(check_rng(5, "zev"), setup4)
    assert out.detail["null_dim"] == [3]
    assert out.residual < 1e-9
