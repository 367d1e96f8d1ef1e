"""Linear systems for imbalanced scalar products and their structured matrices.

Each public function evaluates an identity two ways and returns residuals;
nothing here raises on a failed identity. Unknowns are populated by brute
force from :mod:`xyzbethe.scalar`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import hilbert
from .bethe import bethe_vector_m, chi, dual_bethe_vector_m, eigenvalue
from .errors import InvalidParameters, PoleCollision
from .gauge import GaugeParams
from .kit import COLLISION_TOL, alpha_hat, alpha_l, beta_minus_hat, beta_plus_hat, f_func, f_prod, h_func
from .scalar import balanced_closed_form, brute_force_sp, evaluation_point, omega_ab

RICHARDSON_OFFSETS = (1e-5, 1e-6, 1e-7)


def _without(seq, *idx):
    return [w for i, w in enumerate(seq) if i not in idx]


def _thprod(kind, values, params, scale=1):
    out = 1.0 + 0j
    for w in values:
        out *= params.th(kind, w, scale)
    return out


def _rel(diff, scale):
    diff = np.max(np.abs(np.asarray(diff)))
    scale = np.max(np.abs(np.asarray(scale)))
    return float(diff / scale) if scale > 0 else float(diff)


def _f_left(us, v, params):
    """prod over u in us of f(u, v)."""
    out = 1.0 + 0j
    for u in us:
        out *= f_func(u, v, params)
    return out


@dataclass
class CascadeSystem:
    nu: int
    kappa: int
    vbar: tuple
    ubar: tuple
    X: dict = field(default_factory=dict)


def x_oracle(nu, vs, us, gp) -> dict:
    """X_j^lam = S^{nu,lam}(v | u without u_j) for lam = 0..3, j over u."""
    return {
        lam: np.array([brute_force_sp(nu, vs, lam, _without(us, j), gp) for j in range(len(us))])
        for lam in range(4)
    }


def x_scale(nu, vs, us, gp) -> dict:
    """Norm products |<Psi^nu(v)|| * ||Psi^lam(u without u_j)>|, the natural size of X_j^lam."""
    left = dual_bethe_vector_m(nu, vs, gp).vector.norm()
    return {
        lam: np.array([left * bethe_vector_m(lam, _without(us, j), gp).vector.norm() for j in range(len(us))])
        for lam in range(4)
    }


def cascade_system(nu, vs, us, gp) -> CascadeSystem:
    kappa = len(vs) - (len(us) - 1)
    return CascadeSystem(nu % 4, kappa, tuple(vs), tuple(us), x_oracle(nu, vs, us, gp))


# ------------------------------------------------------- homogeneous systems


def omega_matrix(eps, vs, us, gp) -> np.ndarray:
    p = gp.params
    size = len(us)
    out = np.empty((size, size), dtype=complex)
    for j in range(size):
        fj = f_prod(us[j], vs, p)
        for k in range(size):
            fk = f_prod(us[k], _without(us, k), p)
            out[j, k] = -fk / (fj * h_func(us[j], us[k], p)) * alpha_l(eps, us[j] - us[k], gp, numerator=1)
    return out


def homogeneous_residual(p_index, nu, vs, us, gp, X=None) -> dict:
    """Residuals of the even-imbalance system in its three equivalent forms.

    For p != 0, where X vanishes, terms are measured against the norm
    products rather than |X|, so the residual is not a ratio of rounding
    noise. ``x_relative`` is max |X| over the norm products.
    """
    params = gp.params
    n = len(vs)
    size = n - 2 * p_index + 1
    if len(us) != size:
        raise InvalidParameters(f"need {size} parameters for p={p_index}, got {len(us)}")
    if X is None:
        X = x_oracle(nu, vs, us, gp)
    norms = x_scale(nu, vs, us, gp)
    mag = {lam: np.abs(X[lam]) if p_index == 0 else norms[lam] for lam in range(4)}
    chis = {mu: np.array([chi(mu, u, params) for u in us]) for mu in range(4)}
    fk = np.array([f_prod(u, _without(us, k), params) for k, u in enumerate(us)])
    fv = np.array([f_prod(u, vs, params) for u in us])

    # full four-sector form
    diffs, scales = [], []
    for lam in range(4):
        for j in range(size):
            lhs = fv[j] * chis[nu][j]
            coefs = {
                (mu, k): 0.25 * fk[k] / h_func(us[j], us[k], params)
                * alpha_hat(lam - mu, us[j] - us[k], gp, numerator=1) * chis[mu][k]
                for mu in range(4)
                for k in range(size)
            }
            diffs.append(lhs * X[lam][j] - sum(c * X[mu][k] for (mu, k), c in coefs.items()))
            scales.append(abs(lhs) * mag[lam][j] + sum(abs(c) * mag[mu][k] for (mu, k), c in coefs.items()))
    full = _rel(diffs, scales)

    # epsilon form and the chi-free form
    Xe = {e: X[nu % 4] + (-1) ** e * X[(nu + 2) % 4] for e in (0, 1)}
    Me = mag[nu % 4] + mag[(nu + 2) % 4]
    cprod = np.array([np.prod(_without(chis[nu], j)) for j in range(size)])
    Ye = {e: Xe[e] / cprod for e in (0, 1)}
    My = Me / np.abs(cprod)
    res_eps, res_y = [], []
    for e in (0, 1):
        om = omega_matrix(e, vs, us, gp)
        d1 = chis[nu] * Xe[e] + om @ (chis[nu] * Xe[1 - e])
        s1 = np.abs(chis[nu]) * Me + np.abs(om) @ (np.abs(chis[nu]) * Me)
        d2 = Ye[e] + om @ Ye[1 - e]
        s2 = My + np.abs(om) @ My
        res_eps.append(_rel(d1, s1))
        res_y.append(_rel(d2, s2))
    x_rel = max(np.max(np.abs(X[lam]) / norms[lam]) for lam in range(4))
    return {
        "sandwich": full,
        "epsilon": max(res_eps),
        "chi_free": max(res_y),
        "x_relative": float(x_rel),
    }


# ----------------------------------------------------- inhomogeneous systems


def _sector_values(nu, vs, us, gp, closed_balanced):
    n = len(vs)
    if closed_balanced and len(us) == n:
        return {mu: balanced_closed_form(nu, mu, vs, us, gp) for mu in range(4)}
    if len(us) in (n - 2, n + 2):
        # vanishing sectors; kept at zero either way
        if closed_balanced:
            return {mu: 0j for mu in range(4)}
    return {mu: brute_force_sp(nu, vs, mu, us, gp) for mu in range(4)}


def inhomogeneous_residual(nu, p_index, vs, ws, gp, closed_balanced=False) -> float:
    """Max relative residual of the odd-imbalance system over j and lambda."""
    params = gp.params
    n = len(vs)
    size = n - 2 * p_index
    if len(ws) != size:
        raise InvalidParameters(f"need {size} parameters for p={p_index}, got {len(ws)}")
    th = params.th
    x, y = gp.x, gp.y
    X = x_oracle(nu, vs, ws, gp)
    s_full = _sector_values(nu, vs, ws, gp, closed_balanced)
    s_pairs = {
        (a, b): _sector_values(nu, vs, _without(ws, a, b), gp, closed_balanced)
        for a in range(size)
        for b in range(a)
    }
    # the acted-on vectors carry size - 1 operators
    chis = {mu: [chi(mu, w, params, m=size - 1) for w in ws] for mu in range(4)}
    fk = [f_prod(w, _without(ws, k), params) for k, w in enumerate(ws)]
    sign = (-1) ** (p_index % 2)
    diffs, scales = [], []
    for lam in range(4):
        for j, wj in enumerate(ws):
            t1y = th(1, y + wj)
            lhs_terms = [eigenvalue(nu, wj, vs, params) * X[lam][j]]
            for mu in range(4):
                for k in range(size):
                    lhs_terms.append(
                        -th(2, y + wj) / (4 * t1y) * fk[k] / h_func(wj, ws[k], params)
                        * alpha_hat(lam - mu, wj - ws[k], gp) * chis[mu][k] * X[mu][k]
                    )
            rhs_terms = []
            for mu in range(4):
                for (a, b), svals in s_pairs.items():
                    rhs_terms.append(
                        sign / (2 * t1y * th(1, x) ** 2 * th(2, x) ** 2)
                        * omega_ab(a, b, wj, ws, params)
                        * beta_minus_hat(lam - mu, wj, ws[a], ws[b], gp)
                        * svals[mu]
                    )
                rhs_terms.append(
                    sign * th(2, 0.0) ** 2 / (8 * t1y)
                    * beta_plus_hat(lam - mu, wj, gp) * s_full[mu]
                )
            diffs.append(sum(lhs_terms) - sum(rhs_terms))
            scales.append(sum(abs(t) for t in lhs_terms) + sum(abs(t) for t in rhs_terms))
    return _rel(diffs, scales)


def direct_expression(nu, lam, vs, us, gp) -> complex:
    """X_{m+1}^lam at w_{m+1} = -y*, from the sector values on the right."""
    params = gp.params
    n, m = len(vs), len(us)
    z = evaluation_point(gp)
    ws = list(us) + [z]
    th = params.th
    x = gp.x
    s_full = {mu: brute_force_sp(nu, vs, mu, ws, gp) for mu in range(4)}
    total = 0j
    for mu in range(4):
        total += th(2, 0.0) / 8 * beta_plus_hat(lam - mu, z, gp) * s_full[mu]
    for a in range(len(ws)):
        for b in range(a):
            rest = _without(ws, a, b)
            for mu in range(4):
                bm = beta_minus_hat(lam - mu, z, ws[a], ws[b], gp)
                if bm == 0:
                    continue
                total += (
                    omega_ab(a, b, z, ws, params) * bm * brute_force_sp(nu, vs, mu, rest, gp)
                    / (2 * th(1, x) ** 2 * th(2, x) ** 2 * th(2, 0.0))
                )
    sign = (-1) ** (((n - m - 1) // 2) % 2)
    return sign * total / eigenvalue(nu, z, vs, params)


def direct_expression_residual(nu, vs, us, gp) -> float:
    """Compare the direct expression with brute force for the two odd sectors."""
    diffs, scales = [], []
    for lam in (nu + 1, nu + 3):
        oracle = brute_force_sp(nu, vs, lam, us, gp)
        val = direct_expression(nu, lam, vs, us, gp)
        diffs.append(val - oracle)
        scales.append(abs(oracle))
    return _rel(diffs, scales)


def x_independence(nu, vs, us, gp, j=0, shift=0.1, move=None) -> float:
    """Relative change of X_j when u_j alone (or u_move, as a control) is moved."""
    X0 = x_oracle(nu, vs, us, gp)
    moved = list(us)
    k = j if move is None else move
    moved[k] = moved[k] + shift
    X1 = x_oracle(nu, vs, moved, gp)
    return _rel([X1[lam][j] - X0[lam][j] for lam in range(4)], [X0[lam][j] for lam in range(4)] + [1e-300])


# --------------------------------------------------- structured matrices


def a_matrix(vs, us, gp) -> np.ndarray:
    p = gp.params
    th = p.th
    out = np.empty((len(us), len(vs)), dtype=complex)
    for j, u in enumerate(us):
        fu = f_prod(u, vs, p)
        for k, v in enumerate(vs):
            fvk = f_prod(v, _without(vs, k), p)
            out[j, k] = fvk / (fu * f_prod(v, us, p)) * th(1, u - v + gp.x) / th(1, u - v)
    return out


def b_matrix(vs, us, gp, rows=None) -> np.ndarray:
    """B_{jk} = theta2(u_k - r_j - x)/theta1(u_k - r_j) f(u_k, u_k-bar); r defaults to v."""
    p = gp.params
    th = p.th
    rows = list(vs) if rows is None else list(rows)
    out = np.empty((len(rows), len(us)), dtype=complex)
    for k, u in enumerate(us):
        fk = f_prod(u, _without(us, k), p)
        for j, r in enumerate(rows):
            out[j, k] = th(2, u - r - gp.x) / th(1, u - r) * fk
    return out


def om_product_identity(vs, us, gp) -> dict:
    """I - Omega^1 Omega^0 by multiplication and through the rank-n factorisation."""
    p = gp.params
    th = p.th
    x = gp.x
    size = len(us)
    om0, om1 = omega_matrix(0, vs, us, gp), omega_matrix(1, vs, us, gp)
    lhs = np.eye(size) - om1 @ om0
    rhs = -(th(2, 0.0) ** 2) / (th(1, x) * th(2, x)) * (a_matrix(vs, us, gp) @ b_matrix(vs, us, gp))
    out = {"omom": _rel(lhs - rhs, lhs)}
    out["hh_res"] = _hh_residual(vs, us, gp)
    if size > len(vs):
        sv = np.linalg.svd(lhs, compute_uv=False)
        out["rank_excess"] = float(sv[len(vs)] / sv[0])
        out["det_ratio"] = float(abs(hilbert.det(lhs)) / np.prod(sv[: len(vs)]) / sv[0] ** (size - len(vs)))
    return out


def h_sum(j, k, vs, us, gp) -> complex:
    p = gp.params
    th = p.th
    x = gp.x
    total = 0j
    for a, ua in enumerate(us):
        total += (
            _thprod(2, [ua - u for u in us], p)
            * _thprod(1, [ua - v for v in vs], p)
            / (_thprod(1, [ua - u for u in _without(us, a)], p) * _thprod(2, [ua - v for v in vs], p))
            * th(2, ua - us[j] - x) * th(1, ua - us[k] + x)
            / (th(2, ua - us[j]) * th(2, ua - us[k]))
        )
    return total


def h_residue(j, k, vs, us, gp) -> complex:
    p = gp.params
    th = p.th
    x = gp.x
    out = 0j
    if j == k:
        out += (
            f_prod(us[j], vs, p) / f_prod(us[j], _without(us, j), p)
            * th(1, x) * th(2, x) / th(2, 0.0)
        )
    acc = 0j
    for q, v in enumerate(vs):
        acc += (
            f_prod(v, _without(vs, q), p) / f_prod(v, us, p)
            * th(1, us[j] - v + x) * th(2, us[k] - v - x)
            / (th(1, us[j] - v) * th(1, us[k] - v))
        )
    return out + th(2, 0.0) * acc


def _hh_residual(vs, us, gp) -> float:
    size = len(us)
    d = [h_sum(j, k, vs, us, gp) - h_residue(j, k, vs, us, gp) for j in range(size) for k in range(size)]
    s = [h_sum(j, k, vs, us, gp) for j in range(size) for k in range(size)]
    return _rel(d, s)


# ------------------------------------------------------------ Cauchy inverses


def cauchy_matrix(xs, ys, lam, params) -> np.ndarray:
    th = params.th
    out = np.empty((len(xs), len(ys)), dtype=complex)
    for j, xj in enumerate(xs):
        for k, yk in enumerate(ys):
            den = th(1, xj - yk)
            if abs(den) < COLLISION_TOL:
                raise PoleCollision(f"theta1({xj} - {yk}) vanishes")
            out[j, k] = th(1, xj - yk + lam) / den
    return out


def cauchy_inverse(xs, ys, lam, params) -> np.ndarray:
    """Closed-form inverse of the square elliptic Cauchy matrix."""
    th = params.th
    n = len(xs)
    if len(ys) != n:
        raise InvalidParameters("square Cauchy matrix needs #x = #y")
    S = complex(sum(xs) - sum(ys))
    pref = th(1, lam) * th(1, S + lam)
    if abs(pref) < COLLISION_TOL:
        raise PoleCollision("theta1(lambda) theta1(S + lambda) vanishes")
    out = np.empty((n, n), dtype=complex)
    for j in range(n):
        for k in range(n):
            out[j, k] = (
                th(1, S + lam - xs[k] + ys[j]) / th(1, xs[k] - ys[j])
                * _thprod(1, [xs[k] - y for y in ys], params)
                * _thprod(1, [x - ys[j] for x in xs], params)
                / (
                    _thprod(1, [xs[k] - x for x in _without(xs, k)], params)
                    * _thprod(1, [y - ys[j] for y in _without(ys, j)], params)
                )
            ) / pref
    return out


def _sum_s(vs, us):
    return complex(sum(vs[: len(us)]) - sum(us))


def a_inverse(vs, us, gp) -> np.ndarray:
    """Inverse of the square part (first n-1 columns) of A, #u = n - 1."""
    p = gp.params
    th = p.th
    x = gp.x
    n = len(vs)
    vn = vs[-1]
    S = _sum_s(vs, us)
    out = np.empty((n - 1, n - 1), dtype=complex)
    for j in range(n - 1):
        vj = vs[j]
        others = [vs[i] for i in range(n - 1) if i != j]
        for k in range(n - 1):
            uk = us[k]
            out[j, k] = (
                -f_prod(uk, vs, p) / (f_func(vn, vj, p) * th(1, x) * th(1, x - S))
                * _thprod(2, [u - vj for u in us], p) / _thprod(2, [v - vj for v in others], p)
                * th(1, uk - vj - x + S) / th(1, uk - vj)
                * _thprod(1, [uk - v for v in vs[:-1]], p) / _thprod(1, [uk - u for u in _without(us, k)], p)
            )
    return out


def b_inverse(vs, us, gp) -> np.ndarray:
    p = gp.params
    th = p.th
    x = gp.x
    n = len(vs)
    S = _sum_s(vs, us)
    out = np.empty((n - 1, n - 1), dtype=complex)
    for j in range(n - 1):
        uj = us[j]
        for k in range(n - 1):
            vk = vs[k]
            others = [vs[i] for i in range(n - 1) if i != k]
            out[j, k] = (
                1 / (th(2, x) * th(2, x + S))
                * _thprod(1, [u - vk for u in us], p) / _thprod(1, [v - vk for v in others], p)
                * th(2, uj - vk + x + S) / th(1, uj - vk)
                * _thprod(1, [uj - v for v in vs[:-1]], p) / _thprod(2, [uj - u for u in _without(us, j)], p)
            )
    return out


def b_extended(vs, us, zs, gp) -> np.ndarray:
    return b_matrix(vs, us, gp, rows=list(vs) + list(zs))


def b_extended_inverse_columns(vs, us, zs, gp) -> np.ndarray:
    """Last three columns of the inverse of the extended B (#u = n + 3)."""
    p = gp.params
    th = p.th
    x = gp.x
    n = len(vs)
    St = complex(sum(vs) + sum(zs) - sum(us))
    out = np.empty((len(us), len(zs)), dtype=complex)
    for j, uj in enumerate(us):
        for l, zl in enumerate(zs):
            out[j, l] = (
                1 / (th(2, x) * th(2, x + St))
                * th(2, uj - zl + x + St) / th(1, uj - zl)
                * _thprod(1, [uj - v for v in vs], p) * _thprod(1, [uj - z for z in zs], p)
                * _thprod(1, [u - zl for u in us], p)
                / (
                    _thprod(2, [uj - u for u in _without(us, j)], p)
                    * _thprod(1, [v - zl for v in vs], p)
                    * _thprod(1, [z - zl for z in _without(zs, l)], p)
                )
            )
    return out


def cauchy_suite(vs, us, gp, rng=None) -> dict:
    """Product identities for the generic, A, B and extended-B inverses.

    ``us`` has n - 1 entries; the extended check draws its own n + 3 points.
    """
    p = gp.params
    n = len(vs)
    out = {}
    rng = np.random.default_rng(0) if rng is None else rng
    xs = [complex(*rng.uniform(-0.5, 0.5, 2)) for _ in range(n)]
    ys = [complex(*rng.uniform(-0.5, 0.5, 2)) for _ in range(n)]
    lam = complex(*rng.uniform(0.1, 0.4, 2))
    fwd = cauchy_matrix(xs, ys, lam, p)
    out["generic"] = float(np.max(np.abs(fwd @ cauchy_inverse(xs, ys, lam, p) - np.eye(n))))
    if n >= 2:
        A = a_matrix(vs, us, gp)[:, : n - 1]
        B = b_matrix(vs, us, gp)[: n - 1, :]
        out["a_inv"] = float(np.max(np.abs(A @ a_inverse(vs, us, gp) - np.eye(n - 1))))
        out["b_inv"] = float(np.max(np.abs(B @ b_inverse(vs, us, gp) - np.eye(n - 1))))
    return out


# ------------------------------------------------------------ rank one trace


def trace_by_assembly(vs, us, gp) -> complex:
    """1 + sum_k L_kk from numerically inverted square parts of A and B."""
    n = len(vs)
    A = a_matrix(vs, us, gp)
    B = b_matrix(vs, us, gp)
    Ai = hilbert.inv(A[:, : n - 1])
    Bi = hilbert.inv(B[: n - 1, :])
    L = np.outer(Ai @ A[:, n - 1], B[n - 1, :] @ Bi)
    return complex(1 + np.trace(L))


def trace_closed(vs, us, gp) -> complex:
    p = gp.params
    th = p.th
    x = gp.x
    n = len(vs)
    vn = vs[-1]
    S = _sum_s(vs, us)
    head = _thprod(1, [2 * vn - 2 * v for v in vs[:-1]], p, 2) / _thprod(
        1, [2 * vn - 2 * u for u in us], p, 2
    )
    den = th(1, 2 * x, 2) * th(4, 2 * S, 2) - th(4, 2 * x, 2) * th(1, 2 * S, 2)
    total = 0j
    for k in range(n - 1):
        vk = vs[k]
        vnk = vn - vk
        others = _without(vs, k)
        total += (
            _thprod(1, [2 * u - 2 * vk for u in us], p, 2)
            / _thprod(1, [2 * v - 2 * vk for v in others], p, 2)
            * (th(1, 2 * x, 2) * th(4, 2 * vnk + 2 * S, 2) - th(4, 2 * x, 2) * th(1, 2 * vnk + 2 * S, 2))
            / den
        )
    return 1 + head * total


def trace_degenerate(vs, u1, gp) -> complex:
    """Factored value of 1 + sum L_kk at u_k = v_k for k = 2..n-1."""
    p = gp.params
    th = p.th
    x = gp.x
    v1, vn = vs[0], vs[-1]
    return (
        th(1, v1 - vn) * th(2, v1 + vn - 2 * u1) * th(1, x) * th(2, x)
        / (th(1, vn - u1) * th(2, vn - u1) * th(1, v1 - u1 - x) * th(2, v1 - u1 + x))
    )


def _richardson(vals, ratio=10.0):
    # vals at h, h/r, h/r^2 with error a1 h + a2 h^2
    g0, g1, g2 = vals
    r1 = (ratio * g1 - g0) / (ratio - 1)
    r2 = (ratio * g2 - g1) / (ratio - 1)
    return (ratio**2 * r2 - r1) / (ratio**2 - 1)


def rank_one_trace(vs, us, gp) -> dict:
    """Assembly vs closed form, and the degenerate limit vs its factored form."""
    n = len(vs)
    if len(us) != n - 1:
        raise InvalidParameters(f"need {n - 1} parameters, got {len(us)}")
    asm = trace_by_assembly(vs, us, gp)
    closed = trace_closed(vs, us, gp)
    out = {"assembly": asm, "closed": closed, "closed_vs_assembly": abs(asm - closed) / abs(asm)}

    target = trace_degenerate(vs, us[0], gp)
    degen = [us[0]] + list(vs[1 : n - 1])
    out["degenerate_closed"] = abs(trace_closed(vs, degen, gp) - target) / abs(target)
    if n > 2:
        vals = []
        for h in RICHARDSON_OFFSETS:
            pert = [us[0]] + [v + h for v in vs[1 : n - 1]]
            vals.append(trace_by_assembly(vs, pert, gp))
        limit = _richardson(vals)
    else:
        limit = trace_by_assembly(vs, [us[0]], gp)
    out["degenerate_limit"] = abs(limit - target) / abs(target)
    out["degenerate_value"] = target
    return out


# -------------------------------------------------------------- calA, calB


def g_direct(j, vs, us, gp) -> complex:
    p = gp.params
    th = p.th
    x = gp.x
    vj, vn = vs[j], vs[-1]
    S = _sum_s(vs, us)
    total = 0j
    for a, ua in enumerate(us):
        total += (
            th(1, ua - vj - x + S) * th(1, ua - vn + x) / (th(1, ua - vj) * th(1, ua - vn))
            * _thprod(1, [ua - v for v in vs[:-1]], p) / _thprod(1, [ua - u for u in _without(us, a)], p)
        )
    return total


def g_residue(j, vs, us, gp) -> complex:
    p = gp.params
    th = p.th
    x = gp.x
    vn = vs[-1]
    vnj = vn - vs[j]
    S = _sum_s(vs, us)
    return -th(1, x) * th(1, vnj - x + S) / th(1, vnj) * _thprod(1, [vn - v for v in vs[:-1]], p) / _thprod(
        1, [vn - u for u in us], p
    )


def cal_a_closed(j, vs, us, gp) -> complex:
    p = gp.params
    th = p.th
    x = gp.x
    vj, vn = vs[j], vs[-1]
    others = [vs[i] for i in range(len(vs) - 1) if i != j]
    S = _sum_s(vs, us)
    return (
        1 / th(1, x - S)
        * _thprod(2, [u - vj for u in us], p) / _thprod(2, [v - vj for v in others], p)
        * th(1, vn - vj - x + S) / th(2, vn - vj)
        * _thprod(2, [vn - v for v in vs[:-1]], p) / _thprod(2, [vn - u for u in us], p)
    )


def cal_a_via_g(j, vs, us, gp) -> complex:
    p = gp.params
    th = p.th
    x = gp.x
    vj, vn = vs[j], vs[-1]
    others = [vs[i] for i in range(len(vs) - 1) if i != j]
    S = _sum_s(vs, us)
    return (
        -1 / (f_func(vn, vj, p) * th(1, x) * th(1, x - S))
        * _thprod(2, [u - vj for u in us], p) / _thprod(2, [v - vj for v in others], p)
        * f_prod(vn, vs[:-1], p) / f_prod(vn, us, p)
        * g_direct(j, vs, us, gp)
    )


def cal_b_closed(k, vs, us, gp) -> complex:
    p = gp.params
    th = p.th
    x = gp.x
    vk, vn = vs[k], vs[-1]
    others = [vs[i] for i in range(len(vs) - 1) if i != k]
    S = _sum_s(vs, us)
    return (
        -1 / th(2, x + S)
        * _thprod(1, [u - vk for u in us], p) / _thprod(1, [v - vk for v in others], p)
        * th(2, vn - vk + x + S) / th(1, vn - vk)
        * _thprod(1, [vn - v for v in vs[:-1]], p) / _thprod(1, [vn - u for u in us], p)
    )


def contour_sum_calA(vs, us, gp) -> dict:
    """G^a_j summed directly vs its residue form, and calA/calB three ways."""
    n = len(vs)
    if len(us) != n - 1:
        raise InvalidParameters(f"need {n - 1} parameters, got {len(us)}")
    A = a_matrix(vs, us, gp)
    B = b_matrix(vs, us, gp)
    cal_a_mat = hilbert.solve(A[:, : n - 1], A[:, n - 1])
    cal_b_mat = hilbert.solve(B[: n - 1, :].T, B[n - 1, :])
    g_d = np.array([g_direct(j, vs, us, gp) for j in range(n - 1)])
    g_r = np.array([g_residue(j, vs, us, gp) for j in range(n - 1)])
    ca_c = np.array([cal_a_closed(j, vs, us, gp) for j in range(n - 1)])
    ca_g = np.array([cal_a_via_g(j, vs, us, gp) for j in range(n - 1)])
    cb_c = np.array([cal_b_closed(k, vs, us, gp) for k in range(n - 1)])
    return {
        "g_direct": g_d,
        "g_residue": g_r,
        "jaj1": _rel(g_d - g_r, np.abs(g_d) + np.abs(g_r)),
        "calA_closed_vs_matrix": _rel(ca_c - cal_a_mat, cal_a_mat),
        "calA_g_vs_matrix": _rel(ca_g - cal_a_mat, cal_a_mat),
        "calB_closed_vs_matrix": _rel(cb_c - cal_b_mat, cal_b_mat),
    }


# --------------------------------------------------------- zero eigenvectors


def zev_y1(vs, us, zs, gp) -> np.ndarray:
    """Columns Y^1_{j;l} (C_l = 1) for the three extension points."""
    p = gp.params
    x = gp.x
    St = complex(sum(vs) + sum(zs) - sum(us))
    out = np.empty((len(us), len(zs)), dtype=complex)
    for j, uj in enumerate(us):
        for l, zl in enumerate(zs):
            out[j, l] = (
                p.th(2, x + uj - zl + St)
                * _thprod(1, [uj - z for z in _without(zs, l)], p)
                * _thprod(1, [uj - v for v in vs], p)
                / _thprod(2, [uj - u for u in _without(us, j)], p)
            )
    return out


def zev_y0_closed(vs, us, zs, gp) -> np.ndarray:
    p = gp.params
    th = p.th
    x = gp.x
    St = complex(sum(vs) + sum(zs) - sum(us))
    out = np.empty((len(us), len(zs)), dtype=complex)
    for j, uj in enumerate(us):
        for l, zl in enumerate(zs):
            zother = _without(zs, l)
            out[j, l] = (
                f_prod(uj, zother, p) * th(2, x) / th(1, x)
                * _thprod(1, [uj - z for z in zother], p) * _thprod(1, [uj - v for v in vs], p)
                / _thprod(2, [uj - u for u in _without(us, j)], p)
                * th(1, x + uj - zl + St)
            )
    return out


def zero_eigenvectors(vs, us, zs, gp) -> dict:
    """Null vectors of A B for #u = n + 3 from the extended-B inverse."""
    n = len(vs)
    if len(us) != n + 3 or len(zs) != 3:
        raise InvalidParameters("need n + 3 parameters and 3 extension points")
    A = a_matrix(vs, us, gp)
    B = b_matrix(vs, us, gp)
    M = A @ B
    Bt = b_extended(vs, us, zs, gp)
    Bt_inv = hilbert.inv(Bt)
    psi = Bt_inv[:, n:]
    psi_closed = b_extended_inverse_columns(vs, us, zs, gp)
    mnorm = np.linalg.norm(M, 2)
    residual = max(
        np.linalg.norm(M @ psi[:, l]) / (mnorm * np.linalg.norm(psi[:, l])) for l in range(3)
    )
    sv = np.linalg.svd(M, compute_uv=False)
    null_dim = int(np.sum(sv < 1e-9 * sv[0]))
    ext_inv = _rel(psi_closed - psi, psi)
    ext_product = float(np.max(np.abs(Bt @ psi_closed - np.eye(n + 3)[:, n:])))

    # Y^1 columns solve the system; Y^0 from the epsilon = 0 equation
    y1 = zev_y1(vs, us, zs, gp)
    om0 = omega_matrix(0, vs, us, gp)
    y0 = -om0 @ y1
    y0_closed = zev_y0_closed(vs, us, zs, gp)
    y1_null = max(
        np.linalg.norm(M @ y1[:, l]) / (mnorm * np.linalg.norm(y1[:, l])) for l in range(3)
    )
    return {
        "residual": float(residual),
        "null_dim": null_dim,
        "bext_inv": ext_inv,
        "bext_product": ext_product,
        "y1_null": float(y1_null),
        "hom_sys_3a": _rel(y0 - y0_closed, y0),
    }
