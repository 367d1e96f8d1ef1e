"""Elementary theta-function ratios used throughout the free-fermion formulas.

Set-valued arguments follow the product convention: ``f_prod(u, vs)`` is the
product of ``f(u, v)`` over ``v in vs`` and an empty product is 1.
"""

from __future__ import annotations

import numpy as np

from .errors import GaugeSingularity, PoleCollision

COLLISION_TOL = 1e-9


def f_func(u, v, params) -> complex:
    """theta1(u - v + eta) / theta1(u - v)."""
    den = params.th(1, u - v)
    if abs(den) < COLLISION_TOL:
        raise PoleCollision(f"f({u}, {v}): theta1(u - v) vanishes")
    return params.th(1, u - v + params.eta_value) / den


def h_func(u, v, params) -> complex:
    """theta1(u - v + eta) / theta1(eta)."""
    eta = params.eta_value
    return params.th(1, u - v + eta) / params.th(1, eta)


def f_prod(u, vs, params) -> complex:
    out = 1.0 + 0j
    for v in vs:
        out *= f_func(u, v, params)
    return out


def f_prod_left(us, v, params) -> complex:
    """prod over u in us of f(u, v)."""
    out = 1.0 + 0j
    for u in us:
        out *= f_func(u, v, params)
    return out


def h_prod(u, vs, params) -> complex:
    out = 1.0 + 0j
    for v in vs:
        out *= h_func(u, v, params)
    return out


def theta_prod(kind, values, params, period_scale=1) -> complex:
    """prod theta_kind(w) over w in values (empty product = 1)."""
    out = 1.0 + 0j
    for w in values:
        out *= params.th(kind, w, period_scale)
    return out


def fourier_hat(coeffs, mu, params) -> complex:
    """sum_{l=0}^{3} exp(-i pi eta mu l) coeffs[l]."""
    return sum(params.phase(-mu * l) * coeffs[l] for l in range(4))


def alpha_l(l, z, gp, numerator=2) -> complex:
    """theta_numerator(z + x_l) / theta1(x_l).

    numerator=2 is the odd-imbalance coefficient. The even-imbalance system
    needs numerator=1, which equals 1 at z = 0.
    """
    th = gp.params.th
    den = th(1, gp.x_k(l))
    if abs(den) < COLLISION_TOL:
        raise GaugeSingularity(f"theta1(x_{l}) vanishes")
    return th(numerator, z + gp.x_k(l)) / den


def alpha_hat(mu, z, gp, numerator=2) -> complex:
    return fourier_hat([alpha_l(l, z, gp, numerator) for l in range(4)], mu, gp.params)


def beta_plus(l, z, gp) -> complex:
    return gp.params.th(2, z + gp.s_k(l))


def beta_minus(l, z, u, v, gp) -> complex:
    th = gp.params.th
    xl = gp.x_k(l)
    return th(2, z - gp.t_k(l)) * th(2, z - u + xl) * th(2, z - v + xl)


def beta_plus_hat(mu, z, gp) -> complex:
    return fourier_hat([beta_plus(l, z, gp) for l in range(4)], mu, gp.params)


def beta_minus_hat(mu, z, u, v, gp) -> complex:
    return fourier_hat([beta_minus(l, z, u, v, gp) for l in range(4)], mu, gp.params)


def lattice_coords(z, tau):
    """(alpha, beta) with z = alpha + beta * tau."""
    beta = np.imag(z) / tau.imag
    alpha = np.real(z) - beta * tau.real
    return alpha, beta


def torus_distance(z1, z2, tau):
    """Distance between z1 and z2 on C / (Z + tau Z)."""
    a, b = lattice_coords(np.asarray(z1 - z2, dtype=complex), tau)
    a = a - np.rint(a)
    b = b - np.rint(b)
    return np.abs(a + b * tau)


def separated(values, min_sep) -> bool:
    values = np.asarray(values, dtype=complex)
    for i in range(len(values)):
        for j in range(i):
            if abs(values[i] - values[j]) < min_sep:
                return False
    return True
