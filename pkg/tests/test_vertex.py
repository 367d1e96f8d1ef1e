from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import TAU, cbox, loop_monodromy, rel
from xyzbethe.errors import InvalidParameters
from xyzbethe.hilbert import parity_operator
from xyzbethe.vertex import (
    ModelParams,
    build_monodromy,
    build_monodromy_derivative,
    build_r,
    couplings,
    eta_phase,
    hamiltonian_direct,
    hamiltonian_log_derivative,
    homogeneous_params,
    rtt_residual,
    transfer,
    weights,
)

XI2 = (0.13 - 0.05j, -0.21 + 0.08j)
P2 = ModelParams(2, TAU, XI2)


def test_monodromy_matches_explicit_loops():
    params = ModelParams(4, TAU, XI2 + (0.3 + 0.1j, -0.02j))
    u = 0.17 + 0.11j
    assert rel(build_monodromy(u, params).blocks, loop_monodromy(u, params)) < 1e-14


def test_weights_factorwise():
    u = 0.23 - 0.1j
    t = P2.th
    den = t(2, 0) * t(4, 0, 2)
    a, b, c, d = weights(u, P2)
    assert rel(a, 2 * t(4, 0.5, 2) * t(1, u + 0.5, 2) * t(4, u, 2) / den) < 1e-15
    assert rel(d, 2 * t(1, 0.5, 2) * t(1, u + 0.5, 2) * t(1, u, 2) / den) < 1e-15
    # R(0) is the permutation
    a0, b0, c0, d0 = weights(0.0, P2)
    assert abs(b0) < 1e-15 and abs(d0) < 1e-15 and rel(a0, c0) < 1e-14


def test_monodromy_derivative_vs_finite_difference():
    u, h = 0.2 + 0.05j, 1e-6
    fd = (build_monodromy(u + h, P2).blocks - build_monodromy(u - h, P2).blocks) / (2 * h)
    assert rel(build_monodromy_derivative(u, P2).blocks, fd) < 1e-8


@settings(max_examples=10, deadline=None)
@given(u=cbox(), v=cbox())
def test_rtt_property(u, v):
    assert rtt_residual(u, v, P2, relative=True) < 1e-12


def test_rtt_generic_eta():
    params = ModelParams(2, TAU, XI2, eta=0.37 + 0.11j)
    assert rtt_residual(0.1 + 0.2j, -0.3j, params, relative=True) < 1e-12


def test_transfer_matrices_commute():
    params = ModelParams(4, TAU, XI2 + (0.3 + 0.1j, -0.02j))
    t1, t2 = transfer(0.1 + 0.1j, params), transfer(-0.3 + 0.2j, params)
    assert rel(t1 @ t2, t2 @ t1) < 1e-12


def test_parity_block_structure():
    params = ModelParams(4, TAU, XI2 + (0.3 + 0.1j, -0.02j))
    T = build_monodromy(0.31 - 0.07j, params)
    p = parity_operator(4)
    assert rel(p @ T.A @ p, T.A) < 1e-14
    assert rel(p @ T.B @ p, -T.B) < 1e-14


def test_free_fermion_point():
    jx, jy, jz = couplings(homogeneous_params(4, TAU))
    assert abs(jz) < 1e-14
    assert abs(jx) > 1e-3 and abs(jy) > 1e-3


@pytest.mark.parametrize("eta", [0.37 + 0.11j, Fraction(1, 2)])
def test_hamiltonian_from_log_derivative(eta):
    params = homogeneous_params(4, TAU, eta=eta)
    diff = hamiltonian_log_derivative(params) - hamiltonian_direct(params)
    assert np.max(np.abs(diff)) < 1e-10


def test_log_derivative_needs_homogeneous():
    with pytest.raises(InvalidParameters):
        hamiltonian_log_derivative(P2)


def test_eta_phase_exact():
    assert eta_phase(Fraction(1, 2), 1) == 1j
    assert eta_phase(Fraction(1, 2), -3) == 1j
    assert eta_phase(Fraction(1, 2), 6) == -1
    assert abs(eta_phase(0.25, 2) - 1j) < 1e-15


@pytest.mark.parametrize("N,xi", [(3, (0, 0, 0)), (0, ()), (2, (0.1,)), (2, (0.1, 0.1))])
def test_param_validation(N, xi):
    with pytest.raises(InvalidParameters):
        ModelParams(N, TAU, xi)
