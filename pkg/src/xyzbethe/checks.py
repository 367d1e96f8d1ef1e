"""Registry of numerical identity checks run by the ``verify`` harness.

A check evaluates one identity and returns a single residual, compared with
its tolerance (``<=`` by default, ``>=`` for non-vanishing claims). Each check
draws from its own generator seeded by ``(seed, crc32(check_id))``, so the
outcome does not depend on which other checks run or in what order.
"""

from __future__ import annotations

import threading
import zlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import cascade, scalar
from .bethe import (
    _newton,
    bethe_vector_m,
    chi,
    chi_scale,
    dual_bethe_vector_m,
    eigen_check,
    eigenvalue,
    omega_and_V,
    solve_bethe_roots,
    surviving_sector,
    twin,
    twin_parity,
)
from .gauge import (
    GaugeParams,
    a_func,
    d_func,
    dual_vacuum,
    gauge_det,
    gauge_matrix,
    gauge_monodromy,
    sample_gauge,
    vacuum,
)
from .hilbert import parity_operator
from .kit import (
    alpha_hat,
    alpha_l,
    beta_minus,
    beta_minus_hat,
    beta_plus,
    beta_plus_hat,
    f_prod,
    torus_distance,
)
from .theta import ModularContext, eval_theta, eval_theta_derivative, reduce_argument, theta_series_direct
from .vertex import (
    ModelParams,
    build_monodromy,
    couplings,
    hamiltonian_direct,
    hamiltonian_log_derivative,
    homogeneous_params,
    rtt_residual,
    transfer,
)


@dataclass(frozen=True)
class Setup:
    """Everything a check needs about the model at one chain length."""

    seed: int
    N: int
    tau: complex
    xi: object = "random"
    gauge: object = "random"
    nu: int = 1

    def _rng(self, label):
        return np.random.default_rng([self.seed, self.N, zlib.crc32(label.encode())])

    @property
    def params(self) -> ModelParams:
        return _setup_cache(self, "model")["params"]

    @property
    def gp(self) -> GaugeParams:
        return _setup_cache(self, "model")["gp"]

    @property
    def roots(self):
        return _setup_cache(self)["roots"]

    @property
    def vbar(self) -> list:
        return list(self.roots.selected)

    @property
    def nu_s(self) -> int:
        """Sector in which the on-shell vectors are nonzero (nu or nu + 2)."""
        return _setup_cache(self)["nu_s"]


def random_xi(rng, N):
    return tuple(rng.uniform(-0.3, 0.3, N) + 1j * rng.uniform(-0.2, 0.2, N))


_SETUPS: dict = {}
_SETUP_LOCK = threading.Lock()


def _setup_cache(setup: Setup, stage: str = "roots") -> dict:
    """Build the model, the gauge and (on demand) the on-shell roots once per setup."""
    with _SETUP_LOCK:
        entry = _SETUPS.setdefault(setup, {})
        if "params" not in entry:
            xi = random_xi(setup._rng("xi"), setup.N) if setup.xi == "random" else setup.xi
            params = ModelParams(setup.N, setup.tau, xi)
            if setup.gauge == "random":
                gp = sample_gauge(params, setup._rng("gauge"))
            else:
                gp = GaugeParams(setup.gauge[0], setup.gauge[1], params)
            entry.update(params=params, gp=gp)
        if stage == "roots" and "roots" not in entry:
            roots = solve_bethe_roots(setup.nu, entry["params"])
            nu_s = surviving_sector(setup.nu, list(roots.selected), entry["gp"])
            entry.update(roots=roots, nu_s=nu_s)
        return entry


@dataclass(frozen=True)
class Check:
    check_id: str
    paper_ref: str
    tags: tuple
    tolerance: float
    run: Callable
    N: int | None = None
    compare: str = "le"


@dataclass
class Outcome:
    residual: float
    detail: dict = field(default_factory=dict)
    structure_ok: bool = True


def _rel(a, b, scale=None) -> float:
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    if scale is None:
        scale = np.maximum(np.abs(a), np.abs(b))
    scale = np.asarray(scale, dtype=float)
    diff = np.abs(a - b)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(scale > 0, diff / np.where(scale > 0, scale, 1.0), diff)
    return float(np.max(ratio))


def check_rng(seed: int, check_id: str):
    return np.random.default_rng([seed, zlib.crc32(check_id.encode())])


def _crand(rng, box=0.5, size=None):
    if size is None:
        return complex(rng.uniform(-box, box) + 1j * rng.uniform(-box, box))
    return rng.uniform(-box, box, size) + 1j * rng.uniform(-box, box, size)


def _random_tau(rng):
    return complex(rng.uniform(-0.5, 0.5) + 1j * rng.uniform(0.4, 1.5))


# ---------------------------------------------------------------- theta


THETA_POINTS = 100


def _theta_samples(rng):
    for _ in range(THETA_POINTS):
        ctx = ModularContext(_random_tau(rng))
        yield ctx, _crand(rng, 0.6), _crand(rng, 0.6)


def theta_shift(rng, setup) -> Outcome:
    worst = 0.0
    for ctx, u, _ in _theta_samples(rng):
        th = lambda k, w: eval_theta(k, w, ctx)
        e = np.exp(-1j * np.pi * (2 * u + ctx.tau))
        pairs = [
            (th(1, u + 0.5), th(2, u)),
            (th(2, u + 0.5), -th(1, u)),
            (th(1, u + 1), -th(1, u)),
            (th(2, u + 1), -th(2, u)),
            (th(1, u + ctx.tau), -e * th(1, u)),
            (th(2, u + ctx.tau), e * th(2, u)),
        ]
        worst = max(worst, max(_rel(a, b) for a, b in pairs))
    return Outcome(worst)


def theta_sum_product(rng, setup) -> Outcome:
    worst = 0.0
    for ctx, u, v in _theta_samples(rng):
        th = lambda k, w, s=1: eval_theta(k, w, ctx, s)
        lhs = 2 * th(1, u + v, 2) * th(4, u - v, 2)
        t1, t2 = th(1, u) * th(2, v), th(2, u) * th(1, v)
        worst = max(worst, _rel(lhs, t1 + t2, max(abs(lhs), abs(t1) + abs(t2))))
    return Outcome(worst)


def theta_product_split(rng, setup) -> Outcome:
    worst = 0.0
    for ctx, u, v in _theta_samples(rng):
        th = lambda k, w, s=1: eval_theta(k, w, ctx, s)
        lhs = th(1, u) * th(2, v)
        t1 = th(1, u + v, 2) * th(4, u - v, 2)
        t2 = th(4, u + v, 2) * th(1, u - v, 2)
        worst = max(worst, _rel(lhs, t1 + t2, max(abs(lhs), abs(t1) + abs(t2))))
    return Outcome(worst)


def theta_double_angle(rng, setup) -> Outcome:
    worst = 0.0
    for ctx, u, _ in _theta_samples(rng):
        th = lambda k, w, s=1: eval_theta(k, w, ctx, s)
        worst = max(worst, _rel(th(1, u) * th(2, u), th(1, 2 * u, 2) * th(4, 0, 2)))
    return Outcome(worst)


def theta_derivative_ratio(rng, setup) -> Outcome:
    worst = 0.0
    for ctx, _, _ in _theta_samples(rng):
        lhs = eval_theta_derivative(1, 0.0, ctx) / eval_theta_derivative(1, 0.0, ctx, 2)
        rhs = 2 * eval_theta(4, 0.0, ctx, 2) / eval_theta(2, 0.0, ctx)
        worst = max(worst, _rel(lhs, rhs))
    return Outcome(worst)


def theta_direct_series(rng, setup) -> Outcome:
    worst = 0.0
    for _ in range(20):
        tau = _random_tau(rng)
        ctx = ModularContext(tau)
        u = _crand(rng, 0.5)
        for kind in range(1, 5):
            worst = max(worst, _rel(eval_theta(kind, u, ctx), theta_series_direct(kind, u, tau)))
    return Outcome(worst)


# ---------------------------------------------------------- coefficients


def _kit_gauge(rng, setup):
    return sample_gauge(setup.params, rng)


def kit_alpha_support(rng, setup) -> Outcome:
    worst = 0.0
    for _ in range(20):
        gp = _kit_gauge(rng, setup)
        z = _crand(rng)
        scale = sum(abs(alpha_l(l, z, gp)) for l in range(4))
        for num in (1, 2):
            worst = max(worst, abs(alpha_hat(1, z, gp, num)) / scale, abs(alpha_hat(3, z, gp, num)) / scale)
        for e in (0, 1):
            val = alpha_hat(0, z, gp) + (-1) ** e * alpha_hat(2, z, gp)
            worst = max(worst, _rel(val, 4 * alpha_l(e, z, gp)))
    return Outcome(worst)


def kit_beta(rng, setup) -> Outcome:
    worst = 0.0
    for _ in range(20):
        gp = _kit_gauge(rng, setup)
        z, u, v = _crand(rng), _crand(rng), _crand(rng)
        for l in range(4):
            worst = max(worst, _rel(beta_plus(l + 2, z, gp), -beta_plus(l, z, gp)))
            worst = max(worst, _rel(beta_minus(l + 2, z, u, v, gp), -beta_minus(l, z, u, v, gp)))
        for e in (0, 1):
            ph = 4 * (-1j) ** e
            bp = beta_plus_hat(1, z, gp) + (-1) ** e * beta_plus_hat(3, z, gp)
            bm = beta_minus_hat(1, z, u, v, gp) + (-1) ** e * beta_minus_hat(3, z, u, v, gp)
            worst = max(worst, _rel(bp, ph * beta_plus(e, z, gp)))
            worst = max(worst, _rel(bm, ph * beta_minus(e, z, u, v, gp)))
    return Outcome(worst)


# --------------------------------------------------------------- vertex


def _window_point(rng, tau):
    # |Im| <= Im(tau)/4 keeps u - v inside the theta reduction window, where
    # R(u - v) stays O(1) and the absolute residual is not dominated by scale
    h = tau.imag / 4
    return complex(rng.uniform(-0.5, 0.5) + 1j * rng.uniform(-h, h))


def vertex_rtt(rng, setup) -> Outcome:
    worst = 0.0
    for _ in range(20):
        params = ModelParams(setup.N, setup.tau, random_xi(rng, setup.N))
        u, v = _window_point(rng, params.tau), _window_point(rng, params.tau)
        worst = max(worst, rtt_residual(u, v, params))
    return Outcome(worst)


def vertex_rtt_relative(rng, setup) -> Outcome:
    worst = 0.0
    for _ in range(20):
        params = ModelParams(setup.N, setup.tau, random_xi(rng, setup.N))
        worst = max(worst, rtt_residual(_crand(rng), _crand(rng), params, relative=True))
    return Outcome(worst)


def vertex_commuting(rng, setup) -> Outcome:
    worst = 0.0
    for _ in range(5):
        params = ModelParams(setup.N, setup.tau, random_xi(rng, setup.N))
        t1, t2 = transfer(_crand(rng), params), transfer(_crand(rng), params)
        scale = np.max(np.abs(t1)) * np.max(np.abs(t2)) * params.dim
        worst = max(worst, float(np.max(np.abs(t1 @ t2 - t2 @ t1)) / scale))
    return Outcome(worst)


GENERIC_ETA = 0.37 + 0.11j


def vertex_hamiltonian(rng, setup) -> Outcome:
    params = homogeneous_params(setup.N, setup.tau, eta=GENERIC_ETA)
    diff = hamiltonian_log_derivative(params) - hamiltonian_direct(params)
    return Outcome(float(np.max(np.abs(diff))))


def vertex_free_fermion(rng, setup) -> Outcome:
    params = homogeneous_params(setup.N, setup.tau, eta=Fraction(1, 2))
    jx, jy, jz = couplings(params)
    return Outcome(float(abs(jz)), {"jx": _cjson(jx), "jy": _cjson(jy)})


def vertex_parity_blocks(rng, setup) -> Outcome:
    params = setup.params
    sign = np.diag(parity_operator(params.N)).real
    same = np.equal.outer(sign, sign)
    worst = 0.0
    for _ in range(3):
        t = build_monodromy(_crand(rng), params)
        scale = np.max(np.abs(t.blocks))
        for blk, keep in ((t.A, same), (t.D, same), (t.B, ~same), (t.C, ~same)):
            worst = max(worst, float(np.max(np.abs(np.where(keep, 0, blk)))) / scale)
    return Outcome(worst)


# ---------------------------------------------------------------- gauge


def gauge_det_check(rng, setup) -> Outcome:
    worst = 0.0
    for _ in range(10):
        gp = sample_gauge(setup.params, rng)
        u = _crand(rng)
        ref = gauge_det(u, gp)
        for k in range(-4, 5):
            worst = max(worst, _rel(np.linalg.det(gauge_matrix(k, u, gp)), ref))
    return Outcome(worst)


def _vec_rel(lhs, rhs, scale=None):
    scale = np.linalg.norm(rhs) if scale is None else scale
    return float(np.linalg.norm(lhs - rhs) / scale)


def gauge_vacuum_actions(rng, setup) -> Outcome:
    gp = setup.gp
    N = gp.params.N
    worst = 0.0
    names = {}
    for l in range(4):
        right = {k: vacuum(k, gp).amp for k in (l - 1, l, l + 1)}
        left = {k: dual_vacuum(k, gp).amp for k in (l - 1, l, l + 1)}
        g = gp.gamma(l) / gp.gamma(l + N)
        for _ in range(5):
            u = _crand(rng)
            T = gauge_monodromy(l, l + N, u, gp)
            a, d = a_func(u, gp.params), d_func(u, gp.params)
            res = {
                "C_right": np.linalg.norm(T.C @ right[l]) / (np.linalg.norm(T.C, 2) * np.linalg.norm(right[l])),
                "A_right": _vec_rel(T.A @ right[l], a * right[l + 1]),
                "D_right": _vec_rel(T.D @ right[l], d * right[l - 1]),
                "B_left": np.linalg.norm(left[l] @ T.B) / (np.linalg.norm(T.B, 2) * np.linalg.norm(left[l])),
                "A_left": _vec_rel(left[l] @ T.A, g * a * left[l - 1]),
                "D_left": _vec_rel(left[l] @ T.D, d / g * left[l + 1]),
            }
            for key, val in res.items():
                names[key] = max(names.get(key, 0.0), float(val))
    worst = max(names.values())
    return Outcome(worst, {"by_relation": names})


# ---------------------------------------------------------------- bethe


def bethe_roots(rng, setup) -> Outcome:
    rs = setup.roots
    N = setup.N
    ok = (
        len(rs.roots) == N
        and len(rs.twin_pairs) == N // 2
        and len(rs.selected) == N // 2
        and abs(rs.diagnostics["winding"] - N) < 1e-6
    )
    detail = {
        "roots": len(rs.roots),
        "twin_pairs": len(rs.twin_pairs),
        "selected": len(rs.selected),
        "winding": round(float(rs.diagnostics["winding"].real), 6),
    }
    return Outcome(float(np.max(rs.residuals)), detail, ok)


def bethe_root_stability(rng, setup) -> Outcome:
    params = setup.params
    worst = 0.0
    for z in setup.roots.roots:
        start = z + 1e-3 * _crand(rng, 1.0)
        zz = complex(reduce_argument(_newton(setup.nu, start, params), params.tau).u)
        worst = max(worst, float(torus_distance(zz, z, params.tau)))
    return Outcome(worst)


def bethe_twin_relation(rng, setup) -> Outcome:
    params = setup.params
    worst = 0.0
    for nu in range(4):
        s = twin_parity(nu, params)
        for _ in range(5):
            z = _crand(rng, 0.4) + 0.3
            val = chi(nu, twin(z, params.tau), params) - s * chi(nu, z, params)
            worst = max(worst, abs(val) / chi_scale(z, params))
    return Outcome(worst)


def bethe_eigen(rng, setup) -> Outcome:
    worst = 0.0
    for _ in range(5):
        rep = eigen_check(setup.nu_s, setup.vbar, _crand(rng), setup.gp)
        worst = max(worst, rep.left_residual, rep.right_residual)
    return Outcome(worst)


def bethe_eigen_zero(rng, setup) -> Outcome:
    params = setup.params
    vs = setup.vbar
    worst = 0.0
    for a, v in enumerate(vs):
        z = twin(v, params.tau)
        others = [w for i, w in enumerate(vs) if i != a]
        scale = chi_scale(z, params) * abs(f_prod(z, others, params))
        worst = max(worst, abs(eigenvalue(setup.nu_s, z, vs, params)) / scale)
    return Outcome(worst)


def bethe_omega_forms(rng, setup) -> Outcome:
    data = omega_and_V(setup.vbar, setup.nu_s, setup.params)
    return Outcome(_rel(data.Omega_a, data.Omega_d))


def bethe_omega_limit(rng, setup) -> Outcome:
    params = setup.params
    data = omega_and_V(setup.vbar, setup.nu_s, params)
    worst = 0.0
    for v, om in zip(setup.vbar, data.Omega_limit):
        # symmetric approach cancels the first-order term
        h = 1e-7
        approach = 0.5 * sum(eigenvalue(setup.nu_s, v + d, setup.vbar, params) for d in (h, -h))
        worst = max(worst, _rel(approach, params.th(2, 0.0) * om))
    return Outcome(worst)


def _opposite_weight(amp, expected, sign):
    norm = np.linalg.norm(amp)
    if norm == 0:
        return 0.0
    return float(np.linalg.norm(amp[sign != expected]) / norm)


def bethe_grading(rng, setup) -> Outcome:
    gp = setup.gp
    N, n = gp.params.N, gp.params.n
    sign = np.diag(parity_operator(N)).real
    worst = 0.0
    for m in range(N + 1):
        us = scalar.sample_offshell(rng, m, gp, avoid=setup.vbar)
        for lam in range(4):
            right = bethe_vector_m(lam, us, gp).vector.amp
            left = dual_bethe_vector_m(lam, us, gp).vector.amp
            parity = (-1) ** ((lam + m) % 2)
            worst = max(worst, _opposite_weight(right, parity, sign), _opposite_weight(left, parity, sign))
    # on-shell: one of each pair nu, nu + 2 vanishes and carries no parity
    lefts = [dual_bethe_vector_m(lam, setup.vbar, gp).vector.amp for lam in range(4)]
    top = max(np.linalg.norm(v) for v in lefts)
    for lam, left in enumerate(lefts):
        if np.linalg.norm(left) > 1e-6 * top:
            worst = max(worst, _opposite_weight(left, (-1) ** ((lam + n) % 2), sign))
    return Outcome(worst)


def bethe_symmetry(rng, setup) -> Outcome:
    gp = setup.gp
    n = gp.params.n
    worst = 0.0
    for m in range(2, n + 2):
        us = scalar.sample_offshell(rng, m, gp, avoid=setup.vbar)
        i, j = rng.choice(m, size=2, replace=False)
        swapped = list(us)
        swapped[i], swapped[j] = swapped[j], swapped[i]
        for lam in range(4):
            a = bethe_vector_m(lam, us, gp).vector.amp
            b = bethe_vector_m(lam, swapped, gp).vector.amp
            worst = max(worst, _vec_rel(a, b, max(np.linalg.norm(a), 1e-300)))
    return Outcome(worst)


# --------------------------------------------------------------- scalar


SCALAR_DRAWS = 10


def _draws(rng, setup, m, count):
    for _ in range(count):
        yield scalar.sample_offshell(rng, m, setup.gp, avoid=setup.vbar)


def scalar_balanced_eps(rng, setup) -> Outcome:
    vs, gp, nu = setup.vbar, setup.gp, setup.nu_s
    worst = 0.0
    for us in _draws(rng, setup, len(vs), SCALAR_DRAWS):
        for e in (0, 1):
            worst = max(worst, _rel(scalar.balanced_eps(nu, vs, us, e, gp), scalar.brute_force_eps(nu, vs, us, e, gp)))
    return Outcome(worst)


def scalar_balanced_components(rng, setup) -> Outcome:
    vs, gp, nu = setup.vbar, setup.gp, setup.nu_s
    worst = 0.0
    for us in _draws(rng, setup, len(vs), SCALAR_DRAWS):
        for mu in (nu, nu + 2):
            worst = max(
                worst,
                _rel(scalar.balanced_closed_form(nu, mu, vs, us, gp), scalar.brute_force_sp(nu, vs, mu, us, gp)),
            )
    return Outcome(worst)


def scalar_prop1(rng, setup) -> Outcome:
    vs, gp, nu = setup.vbar, setup.gp, setup.nu_s
    n, N = len(vs), gp.params.N
    worst = 0.0
    for m in (n - 2, n + 2):
        if not 0 <= m <= N:
            continue
        for us in _draws(rng, setup, m, 3):
            for lam in (nu, nu + 2):
                worst = max(worst, scalar.prop1_vanishing(nu, vs, lam, us, gp))
    return Outcome(worst)


def scalar_plus1(rng, setup) -> Outcome:
    vs, gp, nu = setup.vbar, setup.gp, setup.nu_s
    worst = 0.0
    for us in _draws(rng, setup, len(vs) - 1, SCALAR_DRAWS):
        for e in (0, 1):
            worst = max(worst, _rel(scalar.imbalance_plus1(nu, vs, us, e, gp), scalar.brute_force_eps(nu, vs, us, e, gp)))
    return Outcome(worst)


def scalar_plus1_route(rng, setup) -> Outcome:
    vs, gp, nu = setup.vbar, setup.gp, setup.nu_s
    worst = 0.0
    for us in _draws(rng, setup, len(vs) - 1, SCALAR_DRAWS):
        for e in (0, 1):
            worst = max(
                worst,
                _rel(scalar.imbalance_plus1(nu, vs, us, e, gp), scalar.imbalance_plus1_route(nu, vs, us, e, gp)),
            )
    return Outcome(worst)


def scalar_minus1(rng, setup) -> Outcome:
    vs, gp, nu = setup.vbar, setup.gp, setup.nu_s
    worst = 0.0
    for us in _draws(rng, setup, len(vs) + 1, SCALAR_DRAWS):
        for e in (0, 1):
            worst = max(worst, _rel(scalar.imbalance_minus1(nu, vs, us, e, gp), scalar.brute_force_eps(nu, vs, us, e, gp)))
    return Outcome(worst)


def scalar_selection_rule(rng, setup) -> Outcome:
    vs, gp, nu = setup.vbar, setup.gp, setup.nu_s
    n, N = len(vs), gp.params.N
    worst = 0.0
    for kappa in range(-2, 3):
        m = n - kappa
        if not 0 <= m <= N:
            continue
        for us in _draws(rng, setup, m, 2):
            for lam in range(4):
                if (lam - nu - kappa) % 2:
                    worst = max(worst, scalar.prop1_vanishing(nu, vs, lam, us, gp))
    return Outcome(worst, {"flag": "selection-rule"})


def scalar_symmetry(rng, setup) -> Outcome:
    vs, gp, nu = setup.vbar, setup.gp, setup.nu_s
    worst = 0.0
    for us in _draws(rng, setup, len(vs), 3):
        pu = list(rng.permutation(us))
        pv = list(rng.permutation(vs))
        for e in (0, 1):
            ref = scalar.brute_force_eps(nu, vs, us, e, gp)
            worst = max(worst, _rel(scalar.brute_force_eps(nu, pv, pu, e, gp), ref))
            worst = max(worst, _rel(scalar.balanced_eps(nu, pv, pu, e, gp), ref))
    return Outcome(worst)


# -------------------------------------------------------------- cascade


CASCADE_DRAWS = 3


def cascade_sandwich(rng, setup) -> Outcome:
    vs, gp, nu = setup.vbar, setup.gp, setup.nu_s
    worst = 0.0
    for us in _draws(rng, setup, len(vs) + 1, CASCADE_DRAWS):
        r = cascade.homogeneous_residual(0, nu, vs, us, gp)
        worst = max(worst, r["sandwich"], r["epsilon"], r["chi_free"])
    return Outcome(worst)


def cascade_trivial_solution(rng, setup) -> Outcome:
    vs, gp, nu = setup.vbar, setup.gp, setup.nu_s
    n = len(vs)
    worst, system = 0.0, 0.0
    for p in (1, -1):
        if n - 2 * p + 1 < 1:
            continue
        for us in _draws(rng, setup, n - 2 * p + 1, CASCADE_DRAWS):
            r = cascade.homogeneous_residual(p, nu, vs, us, gp)
            worst = max(worst, r["x_relative"])
            system = max(system, r["sandwich"], r["epsilon"], r["chi_free"])
    return Outcome(worst, {"system_residual": _fmt(system)}, system < 1e-8)


def cascade_inhomogeneous(rng, setup) -> Outcome:
    vs, gp, nu = setup.vbar, setup.gp, setup.nu_s
    n = len(vs)
    worst = 0.0
    for p in (0, -1):
        for ws in _draws(rng, setup, n - 2 * p, CASCADE_DRAWS):
            for closed in (False, True):
                worst = max(worst, cascade.inhomogeneous_residual(nu, p, vs, ws, gp, closed))
    return Outcome(worst)


def cascade_direct(rng, setup) -> Outcome:
    vs, gp, nu = setup.vbar, setup.gp, setup.nu_s
    n = len(vs)
    worst = 0.0
    for m in (n - 1, n + 1):
        for us in _draws(rng, setup, m, CASCADE_DRAWS):
            worst = max(worst, cascade.direct_expression_residual(nu, vs, us, gp))
    return Outcome(worst)


def cascade_x_independence(rng, setup) -> Outcome:
    vs, gp, nu = setup.vbar, setup.gp, setup.nu_s
    worst, control = 0.0, np.inf
    for us in _draws(rng, setup, len(vs) + 1, 2):
        for j in range(len(us)):
            worst = max(worst, cascade.x_independence(nu, vs, us, gp, j=j))
            # moving any other parameter must visibly change X_j
            k = (j + 1) % len(us)
            control = min(control, cascade.x_independence(nu, vs, us, gp, j=j, move=k))
    return Outcome(worst, {"min_control_change": _fmt(control)}, control > 1e-3)


STRUCTURE_DRAWS = 5


def _om_runs(rng, setup, sizes):
    vs, gp = setup.vbar, setup.gp
    for size in sizes:
        if size < 1:
            continue
        for us in _draws(rng, setup, size, STRUCTURE_DRAWS):
            yield size, cascade.om_product_identity(vs, us, gp)


def cascade_omega_product(rng, setup) -> Outcome:
    n = len(setup.vbar)
    worst = max(r["omom"] for _, r in _om_runs(rng, setup, (n - 1, n + 1, n + 3)))
    return Outcome(worst)


def cascade_hh_sum(rng, setup) -> Outcome:
    n = len(setup.vbar)
    worst = max(r["hh_res"] for _, r in _om_runs(rng, setup, (n - 1, n + 1)))
    return Outcome(worst)


def cascade_rank_bound(rng, setup) -> Outcome:
    n = len(setup.vbar)
    runs = list(_om_runs(rng, setup, (n + 3,)))
    worst = max(max(r["rank_excess"], r["det_ratio"]) for _, r in runs)
    return Outcome(worst)


def cascade_cauchy(rng, setup) -> Outcome:
    vs, gp = setup.vbar, setup.gp
    n = len(vs)
    worst = 0.0
    for us in _draws(rng, setup, n - 1, STRUCTURE_DRAWS):
        worst = max(worst, *cascade.cauchy_suite(vs, us, gp, rng).values())
    for _ in range(STRUCTURE_DRAWS):
        us = scalar.sample_offshell(rng, n + 3, gp, avoid=vs)
        zs = scalar.sample_offshell(rng, 3, gp, avoid=list(vs) + us)
        r = cascade.zero_eigenvectors(vs, us, zs, gp)
        worst = max(worst, r["bext_inv"], r["bext_product"])
    return Outcome(worst)


def _rank_one_runs(rng, setup, count=STRUCTURE_DRAWS):
    vs, gp = setup.vbar, setup.gp
    for us in _draws(rng, setup, len(vs) - 1, count):
        yield cascade.rank_one_trace(vs, us, gp)


def cascade_rank_one(rng, setup) -> Outcome:
    return Outcome(max(r["closed_vs_assembly"] for r in _rank_one_runs(rng, setup)))


def cascade_rank_one_degenerate(rng, setup) -> Outcome:
    runs = list(_rank_one_runs(rng, setup))
    return Outcome(
        max(r["degenerate_limit"] for r in runs),
        {"closed_at_point": _fmt(max(r["degenerate_closed"] for r in runs))},
    )


def cascade_rank_one_generic(rng, setup) -> Outcome:
    vals = [abs(r["assembly"]) for r in _rank_one_runs(rng, setup, 20)]
    return Outcome(float(min(vals)))


def _zev_runs(rng, setup):
    vs, gp = setup.vbar, setup.gp
    n = len(vs)
    for _ in range(STRUCTURE_DRAWS):
        us = scalar.sample_offshell(rng, n + 3, gp, avoid=vs)
        zs = scalar.sample_offshell(rng, 3, gp, avoid=list(vs) + us)
        yield cascade.zero_eigenvectors(vs, us, zs, gp)


def cascade_zero_eigenvectors(rng, setup) -> Outcome:
    runs = list(_zev_runs(rng, setup))
    dims = sorted({r["null_dim"] for r in runs})
    worst = max(max(r["residual"], r["y1_null"]) for r in runs)
    return Outcome(worst, {"null_dim": dims}, dims == [3])


def cascade_zero_propagation(rng, setup) -> Outcome:
    return Outcome(max(r["hom_sys_3a"] for r in _zev_runs(rng, setup)))


def _contour_runs(rng, setup):
    vs, gp = setup.vbar, setup.gp
    for us in _draws(rng, setup, len(vs) - 1, STRUCTURE_DRAWS):
        yield cascade.contour_sum_calA(vs, us, gp)


def cascade_contour_g(rng, setup) -> Outcome:
    return Outcome(max(r["jaj1"] for r in _contour_runs(rng, setup)))


def cascade_cal_ab(rng, setup) -> Outcome:
    worst = 0.0
    for r in _contour_runs(rng, setup):
        worst = max(worst, r["calA_closed_vs_matrix"], r["calA_g_vs_matrix"], r["calB_closed_vs_matrix"])
    return Outcome(worst)


# ------------------------------------------------------------- registry


def _cjson(z):
    z = complex(z)
    return [z.real, z.imag]


def _fmt(x):
    return float(f"{float(x):.6e}")


# (id, function, tolerance, label, extra tags[, min N, compare, max N])
_GLOBAL = [
    ("theta.shift", theta_shift, 1e-11, "theta shift relations under u -> u + 1/2, u + 1, u + tau", ("appendix-a",)),
    ("theta.sum-product", theta_sum_product, 1e-11, "2 th1(u+v|2tau) th4(u-v|2tau) = th1(u) th2(v) + th2(u) th1(v)", ("appendix-a",)),
    ("theta.product-split", theta_product_split, 1e-11, "th1(u) th2(v) as a sum of two products at modulus 2 tau", ("appendix-a",)),
    ("theta.double-angle", theta_double_angle, 1e-11, "th1(u) th2(u) = th1(2u|2tau) th4(0|2tau)", ("appendix-a",)),
    ("theta.derivative-ratio", theta_derivative_ratio, 1e-11, "th1'(0|tau) / th1'(0|2tau) = 2 th4(0|2tau) / th2(0|tau)", ("appendix-a",)),
    ("theta.direct-series", theta_direct_series, 1e-12, "reduced theta evaluation vs unreduced 200-term series", ()),
]

_KIT = [
    ("kit.alpha-support", kit_alpha_support, 1e-11, "alpha-hat support at mu = 1, 3 and alpha-hat_0 +- alpha-hat_2 = 4 alpha_eps", ()),
    ("kit.beta", kit_beta, 1e-11, "beta_{l+2} = -beta_l and beta-hat_1 +- beta-hat_3 = 4 (-i)^eps beta_eps", ()),
    ("vertex.free-fermion", vertex_free_fermion, 1e-12, "J_z = th2(1/2)/th2(0) vanishes at eta = 1/2", ()),
    ("gauge.det", gauge_det_check, 1e-11, "det M_k(u) = 2 th1(y+u)/th2(0) for k = -4..4", ()),
]

_PER_N = [
    ("vertex.rtt", vertex_rtt, 1e-10, "RTT relation with the 8-vertex R-matrix, max-norm, |Im u|, |Im v| <= Im(tau)/4", (), 2, "le", 4),
    ("vertex.rtt-relative", vertex_rtt_relative, 1e-12, "RTT relation, max-norm over the largest entry", (), 2),
    ("vertex.commuting-transfer", vertex_commuting, 1e-10, "[T(u), T(v)] = 0", (), 2),
    ("vertex.hamiltonian", vertex_hamiltonian, 1e-8, "log-derivative of T at u = 0 vs XYZ Hamiltonian", (), 2),
    ("vertex.parity-blocks", vertex_parity_blocks, 1e-12, "A, D preserve and B, C flip the U3 parity", (), 2),
    ("gauge.vacuum-actions", gauge_vacuum_actions, 1e-10, "action of A, B, C, D on the gauge vacua", (), 2),
    ("bethe.roots", bethe_roots, 1e-9, "N roots of chi_nu, paired into twins z, z + 1/2", (), 2),
    ("bethe.root-stability", bethe_root_stability, 1e-8, "Newton restart from perturbed roots", (), 2),
    ("bethe.twin-relation", bethe_twin_relation, 1e-11, "chi_nu(z + 1/2) = (-1)^(nu+n) chi_nu(z)", (), 2),
    ("bethe.eigen", bethe_eigen, 1e-9, "on-shell eigenrelation T(z) Psi = chi_nu(z) f(z, v) Psi, both sides", (), 2),
    ("bethe.eigen-zero", bethe_eigen_zero, 1e-9, "T_nu(v_a*) = 0 at the twins of the roots", (), 2),
    ("bethe.omega-forms", bethe_omega_forms, 1e-9, "Omega_a through a(v_a) equals Omega_a through d(v_a)", (), 2),
    ("bethe.omega-limit", bethe_omega_limit, 1e-6, "T_nu(v_a) = th2(0) Omega_a as a limit", (), 2),
    ("bethe.u3-grading", bethe_grading, 1e-11, "Bethe vectors are U3 eigenvectors", (), 2),
    ("bethe.symmetry", bethe_symmetry, 1e-9, "Bethe vectors are symmetric in their parameters", (), 2),
    ("scalar.balanced-eps", scalar_balanced_eps, 1e-8, "balanced scalar products, epsilon combinations", (), 2),
    ("scalar.balanced-components", scalar_balanced_components, 1e-8, "balanced scalar products, single sectors", (), 2),
    ("scalar.prop1", scalar_prop1, 1e-10, "scalar products with imbalance +-2 vanish", (), 4),
    ("scalar.plus1", scalar_plus1, 1e-8, "imbalance +1 product formula", (), 2),
    ("scalar.plus1-route", scalar_plus1_route, 1e-10, "imbalance +1 through the balanced form at {u, -y*}", (), 2),
    ("scalar.minus1", scalar_minus1, 1e-7, "imbalance -1 double sum of balanced products", (), 2),
    ("scalar.selection-rule", scalar_selection_rule, 1e-11, "selection rule lambda = nu + kappa mod 2", ("selection-rule",), 2),
    ("scalar.symmetry", scalar_symmetry, 1e-10, "scalar products symmetric in v and in u", (), 2),
    ("cascade.sandwich", cascade_sandwich, 1e-8, "even-imbalance system at p = 0 with brute-force X", (), 4),
    ("cascade.trivial-solution", cascade_trivial_solution, 1e-10, "even-imbalance system at p = +-1 has X = 0", (), 4),
    ("cascade.inhomogeneous", cascade_inhomogeneous, 1e-7, "odd-imbalance system at kappa = +-1", (), 4),
    ("cascade.direct-expression", cascade_direct, 1e-8, "explicit X at w_{m+1} = -y*", (), 4),
    ("cascade.x-independence", cascade_x_independence, 1e-9, "X_j does not depend on u_j", (), 4),
    ("cascade.omega-product", cascade_omega_product, 1e-9, "I - Omega^1 Omega^0 = const A B", (), 4),
    ("cascade.hh-sum", cascade_hh_sum, 1e-10, "H_jk sum vs its residue form", ("appendix-c",), 4),
    ("cascade.rank-bound", cascade_rank_bound, 1e-9, "rank of I - Omega^1 Omega^0 is at most n at p = -1", (), 4),
    ("cascade.cauchy-inverse", cascade_cauchy, 1e-9, "closed-form inverses of elliptic Cauchy matrices", ("appendix-b",), 4),
    ("cascade.rank-one-trace", cascade_rank_one, 1e-8, "1 + tr L by assembly vs closed form", ("appendix-c",), 4),
    ("cascade.rank-one-degenerate", cascade_rank_one_degenerate, 1e-6, "1 + tr L at u_k = v_k, factored form", (), 4),
    ("cascade.rank-one-generic", cascade_rank_one_generic, 1e-6, "1 + tr L does not vanish for generic parameters", (), 4, "ge"),
    ("cascade.zero-eigenvectors", cascade_zero_eigenvectors, 1e-9, "three zero eigenvectors of A B from the extended B inverse", ("appendix-b",), 4),
    ("cascade.zero-propagation", cascade_zero_propagation, 1e-8, "Y^0 built from the zero eigenvectors", (), 4),
    ("cascade.contour-g", cascade_contour_g, 1e-10, "G_j direct sum vs residue relation", ("appendix-c",), 4),
    ("cascade.cal-ab", cascade_cal_ab, 1e-9, "calA_j and calB_k closed forms vs matrix solve", ("appendix-c",), 4),
]


def _group(check_id):
    return check_id.split(".", 1)[0]


def build_checks(Ns, tolerances=None) -> list:
    """All checks for the chain lengths ``Ns``; ``tolerances`` overrides by id or prefix."""
    tolerances = tolerances or {}
    out = []

    def tol_for(cid, default):
        best, best_len = default, -1
        for key, val in tolerances.items():
            if (cid == key or cid.startswith(key + ".") or cid.startswith(key)) and len(key) > best_len:
                best, best_len = float(val), len(key)
        return best

    for cid, fn, tol, label, tags in _GLOBAL + _KIT:
        out.append(Check(cid, label, (_group(cid),) + tags, tol_for(cid, tol), fn))
    for N in Ns:
        for entry in _PER_N:
            cid, fn, tol, label, tags, n_min = entry[:6]
            compare = entry[6] if len(entry) > 6 else "le"
            n_max = entry[7] if len(entry) > 7 else None
            if N < n_min or (n_max is not None and N > n_max):
                continue
            full = f"{cid}.N{N}"
            out.append(Check(full, label, (_group(cid),) + tags, tol_for(full, tol), fn, N, compare))
    return sorted(out, key=lambda c: c.check_id)


def passes(check: Check, outcome: Outcome) -> bool:
    r = outcome.residual
    if not np.isfinite(r) or not outcome.structure_ok:
        return False
    return r >= check.tolerance if check.compare == "ge" else r <= check.tolerance
