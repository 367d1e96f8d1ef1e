"""Scalar products between a dual on-shell Bethe vector and off-shell vectors.

Three routes are provided: brute force in the 2^N space (always normalised
by the same-sector self pairing), the closed forms for the balanced case, and
the closed forms for imbalance +1 and -1.  The pairing is bilinear.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bethe import (
    bethe_vector_m,
    dual_bethe_vector_m,
    eigenvalue,
    on_shell_omegas,
    twin,
)
from .errors import (
    DegenerateNormalization,
    EvaluationPointSingular,
    GaugeSingularity,
    InvalidParameters,
    PoleCollision,
)
from .gauge import GaugeParams, a_func, d_func
from .kit import COLLISION_TOL, f_func, f_prod, h_func, torus_distance

NORM_RTOL = 1e-10
EVAL_POINT_TOL = 1e-9


@dataclass(frozen=True)
class ScalarProductSpec:
    """Left on-shell sector/roots, right sector/parameters and the epsilon label."""

    nu: int
    vbar: tuple
    lam: int
    ubar: tuple
    gp: GaugeParams
    epsilon: int = 0

    @property
    def n(self) -> int:
        return len(self.vbar)

    @property
    def m(self) -> int:
        return len(self.ubar)

    @property
    def kappa(self) -> int:
        return self.n - self.m


@dataclass(frozen=True)
class ScalarProductResult:
    value: complex
    method: str
    residual_vs_oracle: float | None = None


# ------------------------------------------------------------- brute force


def _sector_scale(nu, pars, gp, side) -> float:
    # one of nu, nu+2 carries the full weight of the pre-vectors
    build = dual_bethe_vector_m if side == "left" else bethe_vector_m
    return sum(build(k, pars, gp).vector.norm() for k in (nu, nu + 2))


def self_pairing(nu, vs, gp) -> complex:
    """<Psi^nu(v)|Psi^nu(v)>, guarded against the vanishing sector."""
    left = dual_bethe_vector_m(nu, vs, gp).vector.amp
    right = bethe_vector_m(nu, vs, gp).vector.amp
    val = complex(left @ right)
    scale = _sector_scale(nu, vs, gp, "left") * _sector_scale(nu, vs, gp, "right")
    if not abs(val) > NORM_RTOL * scale:
        raise DegenerateNormalization(
            f"self pairing {abs(val):.3e} below {NORM_RTOL:g} x scale {scale:.3e}"
        )
    return val


def brute_force_sp(nu, vs, lam, us, gp) -> complex:
    """N_n^nu(v) <Psi^nu_n(v)|Psi^lam_m(u)>."""
    left = dual_bethe_vector_m(nu, vs, gp).vector.amp
    right = bethe_vector_m(lam, us, gp).vector.amp
    return complex(left @ right) / self_pairing(nu, vs, gp)


def eps_sectors(nu, kappa):
    """Right-hand sectors combined by the epsilon label for a given imbalance."""
    return (nu, nu + 2) if kappa % 2 == 0 else (nu + 1, nu + 3)


def brute_force_eps(nu, vs, us, eps, gp) -> complex:
    """S^{nu,a} + (-1)^eps S^{nu,b} with (a, b) fixed by the parity of the imbalance."""
    a, b = eps_sectors(nu, len(vs) - len(us))
    return brute_force_sp(nu, vs, a, us, gp) + (-1) ** eps * brute_force_sp(nu, vs, b, us, gp)


def prop1_vanishing(nu, vs, lam, us, gp) -> float:
    """|<Psi^nu(v)|Psi^lam(u)>| relative to the product of the vector norms."""
    left = dual_bethe_vector_m(nu, vs, gp).vector
    right = bethe_vector_m(lam, us, gp).vector
    scale = left.norm() * right.norm()
    if scale == 0:
        return 0.0
    return abs(complex(left.amp @ right.amp)) / scale


# ------------------------------------------------------------ closed forms


def _theta2_safe(w, params):
    val = params.th(2, w)
    if abs(val) < COLLISION_TOL:
        raise PoleCollision(f"theta2({w}) vanishes")
    return val


def cauchy_like_part(vs, us, params) -> complex:
    """prod_{a<b} theta2(v_ab) theta2(u_ab) / prod_{a,b} theta2(u_a - v_b)."""
    th = params.th
    num = 1.0 + 0j
    for group in (vs, us):
        for a in range(len(group)):
            for b in range(a + 1, len(group)):
                num *= th(2, group[a] - group[b])
    den = 1.0 + 0j
    for u in us:
        for v in vs:
            den *= _theta2_safe(u - v, params)
    return num / den


def eigen_part(nu, vs, us, params, omegas=None) -> complex:
    """prod_k T_nu(u_k|v) / prod_a Omega_a."""
    if omegas is None:
        omegas = on_shell_omegas(vs, nu, params)
    out = 1.0 + 0j
    for u in us:
        out *= eigenvalue(nu, u, vs, params)
    return out / complex(np.prod(omegas))


def phi1(nu, mu, S, x, params) -> complex:
    if (mu - nu) % 2:
        return 0j
    d = (mu - nu) % 4
    th, tau = params.th, params.tau
    den = th(1, S + d * tau / 2, 2) * th(1, 2 * x, 2)
    if abs(den) < COLLISION_TOL:
        raise GaugeSingularity("phi1 denominator vanishes")
    return (
        np.exp(1j * np.pi * d * x)
        * th(1, S)
        * th(1, S + 2 * x + d * tau / 2, 2)
        / den
    )


def _check_balanced(vs, us):
    if len(vs) != len(us):
        raise InvalidParameters(f"balanced form needs #u = #v, got {len(us)} and {len(vs)}")


def balanced_closed_form(nu, mu, vs, us, gp, omegas=None) -> complex:
    """S^{nu,mu}_{n,n}(v|u) in product form with the phi1 factor."""
    _check_balanced(vs, us)
    p = gp.params
    if (mu - nu) % 2:
        return 0j
    S = complex(sum(vs) - sum(us))
    ratio = p.dth(1, 0.0, 2) / p.dth(1, 0.0)
    return (
        phi1(nu, mu, S, gp.x, p)
        * ratio
        * cauchy_like_part(vs, us, p)
        * eigen_part(nu, vs, us, p, omegas)
    )


def balanced_eps(nu, vs, us, eps, gp, omegas=None) -> complex:
    """S^{nu,nu} + (-1)^eps S^{nu,nu+2} in product form."""
    _check_balanced(vs, us)
    p = gp.params
    xe = gp.x_k(eps)
    den = p.th(1, xe)
    if abs(den) < COLLISION_TOL:
        raise GaugeSingularity(f"theta1(x_{eps}) vanishes")
    S = complex(sum(vs) - sum(us))
    return p.th(1, S + xe) / den * cauchy_like_part(vs, us, p) * eigen_part(nu, vs, us, p, omegas)


def evaluation_point(gp) -> complex:
    """-y* = -y + 1/2, where theta2(y + w) vanishes."""
    return -gp.y + 0.5


def _check_point(z, others, gp, label):
    tau = gp.params.tau
    for w in others:
        if torus_distance(z, w, tau) < EVAL_POINT_TOL:
            raise EvaluationPointSingular(f"-y* collides with {label} element {w}")


def _t_at_point(nu, vs, gp):
    z = evaluation_point(gp)
    _check_point(z, vs, gp, "v")
    val = eigenvalue(nu, z, vs, gp.params)
    scale = abs(a_func(z, gp.params)) + abs(d_func(z, gp.params))
    if abs(val) < EVAL_POINT_TOL * scale:
        raise EvaluationPointSingular("T_nu(-y*|v) vanishes; resample the gauge")
    return val


def imbalance_plus1(nu, vs, us, eps, gp, omegas=None) -> complex:
    """S^{nu;eps}_{n,n-1}(v|u) in direct product form."""
    p = gp.params
    n = len(vs)
    if len(us) != n - 1:
        raise InvalidParameters(f"imbalance +1 needs {n - 1} parameters, got {len(us)}")
    _check_point(evaluation_point(gp), us, gp, "u")
    th = p.th
    y = gp.y
    Sp = complex(sum(vs) - sum(us))
    den_y = 1.0 + 0j
    for v in vs:
        den_y *= th(1, v + y)
    if abs(den_y) < COLLISION_TOL:
        raise EvaluationPointSingular("theta1(v_a + y) vanishes")
    num_y = 1.0 + 0j
    for u in us:
        num_y *= th(1, u + y)
    phase = (-1j) ** eps
    return (
        phase
        / 2
        * th(2, 0.0)
        * th(2, Sp + gp.s_k(eps))
        * num_y
        / den_y
        * cauchy_like_part(vs, us, p)
        * eigen_part(nu, vs, us, p, omegas)
    )


def imbalance_plus1_route(nu, vs, us, eps, gp, omegas=None) -> complex:
    """The same quantity through the balanced form at {u, -y*}."""
    p = gp.params
    z = evaluation_point(gp)
    _check_point(z, us, gp, "u")
    tz = _t_at_point(nu, vs, gp)
    ws = list(us) + [z]
    return (
        -((-1j) ** eps)
        * p.th(2, 0.0)
        * p.th(1, gp.x_k(eps))
        / (2 * tz)
        * balanced_eps(nu, vs, ws, eps, gp, omegas)
    )


def omega_ab(a, b, z, ws, params) -> complex:
    """Coefficient omega_ab(z) for the ordered set ``ws``."""
    wa, wb = ws[a], ws[b]
    rest_a = [w for i, w in enumerate(ws) if i != a]
    num = d_func(wa, params) * a_func(wb, params) - d_func(wb, params) * a_func(wa, params)
    num *= f_prod(wa, rest_a, params)
    for i, w in enumerate(ws):
        if i != b:
            num *= f_func(w, wb, params)
    den = f_func(wa, wb, params) * h_func(wa, z, params) * h_func(z, wb, params)
    if abs(den) < COLLISION_TOL:
        raise PoleCollision(f"omega_{a}{b} denominator vanishes")
    return num / den


def imbalance_minus1(nu, vs, us, eps, gp, omegas=None) -> complex:
    """S^{nu;eps}_{n,n+1}(v|u) as a double sum of balanced products."""
    p = gp.params
    n = len(vs)
    if len(us) != n + 1:
        raise InvalidParameters(f"imbalance -1 needs {n + 1} parameters, got {len(us)}")
    if omegas is None:
        omegas = on_shell_omegas(vs, nu, p)
    z = evaluation_point(gp)
    _check_point(z, us, gp, "u")
    tz = _t_at_point(nu, vs, gp)
    ws = list(us) + [z]
    te = gp.t_k(eps)
    total = 0j
    for a in range(len(ws)):
        for b in range(a):
            rest = [w for i, w in enumerate(ws) if i not in (a, b)]
            total += (
                omega_ab(a, b, z, ws, p)
                * p.th(1, ws[a] - te)
                * p.th(1, ws[b] - te)
                * balanced_eps(nu, vs, rest, eps, gp, omegas)
            )
    th = p.th
    x = gp.x
    pref = (
        -2
        * (-1j) ** eps
        * th(1, gp.x_k(eps))
        / (th(1, x) ** 2 * th(2, x) ** 2 * th(2, 0.0) * tz)
    )
    return pref * total


# ---------------------------------------------------------------- sampling


def sample_offshell(rng, m, gp, avoid=(), min_sep=0.05, min_dist=0.02, max_tries=10000):
    """m generic points in the fundamental domain.

    Points keep ``min_sep`` from each other and from each other's half-period
    shifts, and ``min_dist`` from ``avoid``, its twins, the inhomogeneities and
    the two evaluation points +-y*.
    """
    p = gp.params
    tau = p.tau
    ystar = evaluation_point(gp)
    forbidden = [complex(w) for w in avoid]
    forbidden += [twin(w, tau) for w in forbidden]
    forbidden += list(p.xi) + [ystar, -ystar]
    out = []
    for _ in range(max_tries):
        if len(out) == m:
            break
        al, be = rng.uniform(0, 1, size=2)
        z = complex(al + be * tau)
        if any(torus_distance(z, w, tau) < min_dist for w in forbidden):
            continue
        if any(
            torus_distance(z, w, tau) < min_sep or torus_distance(z + 0.5, w, tau) < min_sep
            for w in out
        ):
            continue
        out.append(z)
    if len(out) != m:
        raise InvalidParameters(f"could not place {m} separated points")
    return out
