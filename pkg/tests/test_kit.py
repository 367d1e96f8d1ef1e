import numpy as np
import pytest
from hypothesis import assume, given, settings

from conftest import TAU, cbox, rel
from xyzbethe.checks import check_rng, kit_alpha_support, kit_beta
from xyzbethe.errors import PoleCollision
from xyzbethe.gauge import GaugeParams
from xyzbethe.kit import (
    alpha_hat,
    alpha_l,
    f_func,
    f_prod,
    f_prod_left,
    fourier_hat,
    h_func,
    lattice_coords,
    separated,
    theta_prod,
    torus_distance,
)
from xyzbethe.vertex import ModelParams

P = ModelParams(2, TAU, (0.1, -0.1))
GP = GaugeParams(0.17 + 0.04j, -0.09 + 0.12j, P)


def test_f_at_free_fermions():
    # eta = 1/2 turns f into a ratio theta2 / theta1
    u, v = 0.31 + 0.1j, -0.05 + 0.2j
    assert rel(f_func(u, v, P), P.th(2, u - v) / P.th(1, u - v)) < 1e-14
    assert rel(f_func(u, v, P) * f_func(v, u, P), -P.th(2, u - v) ** 2 / P.th(1, u - v) ** 2) < 1e-13


def test_h_normalised_at_coincidence():
    assert abs(h_func(0.3, 0.3, P) - 1) < 1e-15


def test_f_pole():
    with pytest.raises(PoleCollision):
        f_func(0.2, 0.2, P)


def test_empty_products():
    assert f_prod(0.1, [], P) == 1 and f_prod_left([], 0.1, P) == 1 and theta_prod(1, [], P) == 1


def test_fourier_hat_inverts():
    coeffs = [1.0, 2j, -0.5, 0.25 + 1j]
    back = [sum(fourier_hat(coeffs, mu, P) * P.phase(mu * l) for mu in range(4)) / 4 for l in range(4)]
    assert np.allclose(back, coeffs, atol=1e-15)


def test_alpha_numerator_one_at_zero():
    for l in range(4):
        assert abs(alpha_l(l, 0.0, GP, numerator=1) - 1) < 1e-14


def test_alpha_hat_odd_modes_vanish():
    z = 0.12 - 0.07j
    scale = sum(abs(alpha_l(l, z, GP)) for l in range(4))
    assert abs(alpha_hat(1, z, GP)) < 1e-12 * scale
    assert abs(alpha_hat(3, z, GP)) < 1e-12 * scale


@pytest.mark.parametrize("fn", [kit_alpha_support, kit_beta])
def test_registry_identities(fn, setup2):
    assert fn(check_rng(0, fn.__name__), setup2).residual < 1e-11


@settings(max_examples=50, deadline=None)
@given(z=cbox(-3, 3), w=cbox(-3, 3))
def test_torus_distance_is_lattice_invariant(z, w):
    a, b = lattice_coords(np.asarray(z - w), TAU)
    # half-period ties have two nearest representatives
    assume(min(abs(a % 1 - 0.5), abs(b % 1 - 0.5)) > 1e-6)
    d = torus_distance(z, w, TAU)
    assert abs(torus_distance(z + 2 - 3 * TAU, w, TAU) - d) < 1e-12
    assert abs(torus_distance(w, z, TAU) - d) < 1e-12
    a, b = lattice_coords(np.asarray(z), TAU)
    assert abs(a + b * TAU - z) < 1e-12


def test_separated():
    assert separated([0, 0.1, 0.2j], 0.05)
    assert not separated([0, 0.01], 0.05)
