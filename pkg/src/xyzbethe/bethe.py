"""Generalized Bethe vectors, free-fermion Bethe equations and on-shell checks."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from . import hilbert
from .errors import (
    DegenerateNormalization,
    DerivativeSingularity,
    InvalidParameters,
    RootCountMismatch,
    TwinPairingFailure,
)
from .gauge import (
    GaugeParams,
    a_func,
    d_func,
    dual_vacuum,
    gauge_monodromy,
    vacuum,
)
from .hilbert import DualVector, StateVector
from .kit import f_prod, lattice_coords as _lattice_coords, torus_distance as _torus_distance
from .theta import reduce_argument
from .vertex import ModelParams, build_monodromy, transfer

PARAM_MIN_SEPARATION = 1e-6
ROOT_TOL = 1e-9
DEDUP_TOL = 1e-8
TWIN_TOL = 1e-7
SECTOR_RATIO = 1e-6


# ---------------------------------------------------------------- vectors


class _MonodromyCache:
    def __init__(self, params):
        self.params = params
        self._store = {}

    def __call__(self, u):
        key = complex(u)
        if key not in self._store:
            self._store[key] = build_monodromy(key, self.params)
        return self._store[key]


def _check_params(us):
    us = [complex(u) for u in us]
    for i in range(len(us)):
        for j in range(i):
            if abs(us[i] - us[j]) < PARAM_MIN_SEPARATION:
                raise InvalidParameters("Bethe parameters must be pairwise distinct")
    return us


def pre_bethe_vector(l: int, us, r: int, gp: GaugeParams, _mono=None) -> np.ndarray:
    """B_{l-r-1,l+r+1}(u_{n-r}) ... B_{l-n,l+n}(u_1) |Omega^{l-n}>.

    ``u_1`` is applied first (rightmost operator).
    """
    n = gp.params.n
    us = _check_params(us)
    if len(us) != n - r:
        raise InvalidParameters(f"expected {n - r} parameters for r={r}, got {len(us)}")
    hilbert.check_dim_cap(gp.params.dim)
    mono = _mono or _MonodromyCache(gp.params)
    vec = vacuum(l - n, gp).amp
    for j, u in enumerate(us, start=1):
        k = l - n + j - 1
        B = gauge_monodromy(k, l + n - j + 1, u, gp, mono(u)).B
        vec = B @ vec
    return vec


def dual_pre_bethe_vector(l: int, vs, r: int, gp: GaugeParams, _mono=None) -> np.ndarray:
    """<Omega-bar^{l-n}| Cbar_{l-n,l+n}(v_1) ... Cbar_{l-r-1,l+r+1}(v_{n-r})."""
    n = gp.params.n
    vs = _check_params(vs)
    if len(vs) != n - r:
        raise InvalidParameters(f"expected {n - r} parameters for r={r}, got {len(vs)}")
    hilbert.check_dim_cap(gp.params.dim)
    mono = _mono or _MonodromyCache(gp.params)
    vec = dual_vacuum(l - n, gp).amp
    for j, v in enumerate(vs, start=1):
        k, kk = l - n + j - 1, l + n - j + 1
        C = gauge_monodromy(k, kk, v, gp, mono(v)).C
        vec = gp.gamma(k) * gp.gamma(kk) * (vec @ C)
    return vec


@dataclass(frozen=True)
class BetheState:
    nu: int
    params_u: tuple
    r: int
    side: str
    on_shell: bool
    vector: StateVector | DualVector
    twin_free: bool = True

    @property
    def m(self) -> int:
        return len(self.params_u)


_vector_cache: dict = {}
_cache_lock = threading.Lock()


def _cache_key(side, nu, us, r, gp):
    p = gp.params
    return (side, nu % 4, tuple(complex(u) for u in us), r, gp.s, gp.t, p.tau, p.xi, p.eta)


def _fourier(side, nu, us, r, gp, builder):
    key = _cache_key(side, nu, us, r, gp)
    with _cache_lock:
        hit = _vector_cache.get(key)
    if hit is not None:
        return hit
    mono = _MonodromyCache(gp.params)
    sign = -1 if side == "right" else 1
    total = np.zeros(gp.params.dim, dtype=complex)
    for l in range(4):
        total += gp.params.phase(sign * nu * l) * builder(l, us, r, gp, mono)
    with _cache_lock:
        _vector_cache[key] = total
    return total


def clear_cache():
    with _cache_lock:
        _vector_cache.clear()


def bethe_vector(nu: int, us, r: int, gp: GaugeParams, on_shell=False) -> BetheState:
    """Fourier sum over l of exp(-i pi eta nu l) |psi^l>."""
    amp = _fourier("right", nu, us, r, gp, pre_bethe_vector)
    return BetheState(nu % 4, tuple(complex(u) for u in us), r, "right", on_shell, StateVector(amp))


def dual_bethe_vector(nu: int, vs, r: int, gp: GaugeParams, on_shell=False) -> BetheState:
    amp = _fourier("left", nu, vs, r, gp, dual_pre_bethe_vector)
    return BetheState(nu % 4, tuple(complex(v) for v in vs), r, "left", on_shell, DualVector(amp))


def bethe_vector_m(nu: int, us, gp: GaugeParams, on_shell=False) -> BetheState:
    """Bethe vector labelled by its number of parameters m (r = n - m)."""
    return bethe_vector(nu, us, gp.params.n - len(us), gp, on_shell)


def dual_bethe_vector_m(nu: int, vs, gp: GaugeParams, on_shell=False) -> BetheState:
    return dual_bethe_vector(nu, vs, gp.params.n - len(vs), gp, on_shell)


# ---------------------------------------------------------- Bethe equations


def _ad_with_derivatives(z, params: ModelParams):
    """a(z), d(z) and their z-derivatives; z may be an array."""
    z = np.asarray(z, dtype=complex)
    eta = params.eta_value
    ta = [params.th(1, z - x + eta) for x in params.xi]
    td = [params.th(1, z - x) for x in params.xi]
    dta = [params.dth(1, z - x + eta) for x in params.xi]
    dtd = [params.dth(1, z - x) for x in params.xi]

    def prod_and_deriv(vals, dvals):
        total = np.ones_like(z)
        deriv = np.zeros_like(z)
        for k in range(len(vals)):
            term = dvals[k]
            for j in range(len(vals)):
                if j != k:
                    term = term * vals[j]
            deriv = deriv + term
            total = total * vals[k]
        return total, deriv

    a, da = prod_and_deriv(ta, dta)
    d, dd = prod_and_deriv(td, dtd)
    return a, d, da, dd


def chi(nu: int, z, params: ModelParams, m=None):
    """chi_nu(z) = (-1)^m e^{i pi eta nu} a(z) + e^{-i pi eta nu} d(z), m = n by default.

    Other m give the combination attached to vectors with m operators.
    """
    a, d, _, _ = _ad_with_derivatives(z, params)
    m = params.n if m is None else m
    val = (-1) ** m * params.phase(nu) * a + params.phase(-nu) * d
    return complex(val) if np.ndim(z) == 0 else val


def chi_derivative(nu: int, z, params: ModelParams):
    _, _, da, dd = _ad_with_derivatives(z, params)
    val = (-1) ** params.n * params.phase(nu) * da + params.phase(-nu) * dd
    return complex(val) if np.ndim(z) == 0 else val


def chi_scale(z, params: ModelParams) -> float:
    """|a(z)| + |d(z)|, the natural magnitude against which |chi| is judged."""
    return abs(a_func(z, params)) + abs(d_func(z, params))


def twin(z: complex, tau: complex) -> complex:
    """z + 1/2 for 0 <= Re z < 1/2, z - 1/2 otherwise (after lattice reduction)."""
    zr = complex(reduce_argument(z, tau).u)
    return zr + 0.5 if zr.real < 0.5 else zr - 0.5


def twin_parity(nu: int, params: ModelParams) -> int:
    """Sign s with chi_nu(z*) = s chi_nu(z); equals (-1)^(nu + n)."""
    return (-1) ** ((nu + params.n) % 2)


@dataclass
class BetheRootSet:
    nu: int
    roots: np.ndarray
    twin_pairs: list
    selected: np.ndarray
    residuals: np.ndarray
    winding: float
    diagnostics: dict = field(default_factory=dict)


def winding_number(nu: int, params: ModelParams, corner: complex, nodes: int = 96) -> float:
    """(1/2 pi i) * contour integral of chi'/chi around the cell at ``corner``."""
    tau = params.tau
    xs, ws = np.polynomial.legendre.leggauss(nodes)
    xs, ws = (xs + 1) / 2, ws / 2
    total = 0j
    for start, edge in ((corner, 1.0), (corner + 1, tau), (corner + 1 + tau, -1.0), (corner + tau, -tau)):
        z = start + xs * edge
        total += np.sum(ws * chi_derivative(nu, z, params) / chi(nu, z, params)) * edge
    return total / (2j * np.pi)


def _newton(nu, z, params, steps=60):
    for _ in range(steps):
        f = chi(nu, z, params)
        df = chi_derivative(nu, z, params)
        if df == 0:
            break
        dz = f / df
        if abs(dz) > 0.25:
            dz *= 0.25 / abs(dz)
        z = z - dz
        if abs(dz) < 1e-15 * max(1.0, abs(z)):
            break
    return z


def solve_bethe_roots(
    nu: int,
    params: ModelParams,
    grid: int = 80,
    select_half: str = "lower",
) -> BetheRootSet:
    """All N roots of chi_nu in the fundamental cell, twin pairs and a twin-free half."""
    tau = params.tau
    N = params.N
    roots = []
    for g in (grid, 2 * grid):
        al = (np.arange(g) + 0.5) / g
        A, Bt = np.meshgrid(al, al, indexing="ij")
        Z = A + Bt * tau
        vals = np.abs(chi(nu, Z, params))
        scale = np.abs(_ad_with_derivatives(Z, params)[0]) + np.abs(_ad_with_derivatives(Z, params)[1])
        rel = vals / scale
        # local minima on the periodic grid
        cand = np.ones_like(rel, dtype=bool)
        for da in (-1, 0, 1):
            for db in (-1, 0, 1):
                if da or db:
                    cand &= rel <= np.roll(np.roll(rel, da, 0), db, 1)
        roots = []
        for z0 in Z[cand]:
            z = _newton(nu, complex(z0), params)
            zr = complex(reduce_argument(z, tau).u)
            if abs(chi(nu, zr, params)) > ROOT_TOL * chi_scale(zr, params):
                continue
            if any(_torus_distance(zr, w, tau) < DEDUP_TOL for w in roots):
                continue
            roots.append(zr)
        if len(roots) == N:
            break
    corner = _safe_corner(roots, tau)
    wind = winding_number(nu, params, corner)
    count = int(round(wind.real))
    if abs(wind - count) > 1e-6 or count != N or len(roots) != N:
        raise RootCountMismatch(
            f"found {len(roots)} roots, argument principle gives {wind:.6f}, expected {N}; "
            "try a finer grid"
        )
    roots = np.array(sorted(roots, key=lambda z: (round(z.real, 9), z.imag)))
    residuals = np.array([abs(chi(nu, z, params)) / chi_scale(z, params) for z in roots])

    pairs = []
    used = set()
    for i, z in enumerate(roots):
        if i in used:
            continue
        zs = twin(z, tau)
        dists = [_torus_distance(zs, w, tau) if j not in used and j != i else np.inf for j, w in enumerate(roots)]
        j = int(np.argmin(dists))
        if dists[j] > TWIN_TOL:
            raise TwinPairingFailure(f"root {z} has no twin within {TWIN_TOL}")
        used.update((i, j))
        pairs.append((i, j))
    lower = [z for z in roots if z.real < 0.5]
    upper = [z for z in roots if z.real >= 0.5]
    selected = np.array(lower if select_half == "lower" else upper)
    if len(selected) != params.n:
        raise TwinPairingFailure("half-domain does not hold N/2 roots")
    twin_check = [
        abs(chi(nu, twin(z, tau), params) - twin_parity(nu, params) * chi(nu, z, params))
        for z in roots
    ]
    return BetheRootSet(
        nu % 4,
        roots,
        pairs,
        selected,
        residuals,
        float(abs(wind)),
        {"corner": corner, "winding": complex(wind), "twin_relation": max(twin_check)},
    )


def _safe_corner(roots, tau, min_gap=0.02):
    # shift the contour so no root sits close to an edge of the cell
    rng = np.random.default_rng(12345)
    candidates = [-0.013 - 0.017 * tau] + [
        -(rng.uniform(0, 0.5) + rng.uniform(0, 0.5) * tau) for _ in range(200)
    ]
    for c in candidates:
        ok = True
        for z in roots:
            a, b = _lattice_coords(np.asarray(z - c), tau)
            a, b = a % 1.0, b % 1.0
            if min(a, 1 - a, b, 1 - b) < min_gap:
                ok = False
                break
        if ok:
            return c
    return candidates[0]


# ---------------------------------------------------------- eigenvalues


def eigenvalue(nu: int, z, vs, params: ModelParams) -> complex:
    """T_nu(z | v) = chi_nu(z) f(z, v)."""
    return chi(nu, z, params) * f_prod(z, vs, params)


@dataclass
class EigenvalueData:
    nu: int
    roots: tuple
    Omega_a: np.ndarray
    Omega_d: np.ndarray
    Omega_limit: np.ndarray
    V: np.ndarray

    def T(self, z, params) -> complex:
        return eigenvalue(self.nu, z, self.roots, params)


def omega_and_V(roots, nu: int, params: ModelParams) -> EigenvalueData:
    """Log-derivative V_a and the normalisation Omega_a in three forms.

    ``Omega_a`` and ``Omega_d`` are the closed forms through a(v_a) and through
    d(v_a); ``Omega_limit`` is lim_{z->v_a} T_nu(z)/theta2(0), i.e.
    chi'(v_a) f(v_a, v_a-bar) / theta1'(0). The first two agree with each
    other but equal ``-(-1)^(n+nu) * Omega_limit``; scalar products use the
    limit.
    """
    roots = tuple(complex(v) for v in roots)
    d1 = params.dth(1, 0.0)
    ph = params.phase(nu)
    oa, od, ol, V = [], [], [], []
    for i, v in enumerate(roots):
        a, d, da, dd = _ad_with_derivatives(v, params)
        a, d, da, dd = complex(a), complex(d), complex(da), complex(dd)
        if abs(d) < 1e-300:
            raise DerivativeSingularity(f"d(v) vanishes at v={v}")
        Va = (da * d - a * dd) / d**2
        others = roots[:i] + roots[i + 1 :]
        fv = f_prod(v, others, params)
        V.append(Va)
        oa.append((-1) ** params.n * ph * a * fv * Va / d1)
        od.append(-d * fv * Va / (ph * d1))
        ol.append(chi_derivative(nu, v, params) * fv / d1)
    return EigenvalueData(nu % 4, roots, np.array(oa), np.array(od), np.array(ol), np.array(V))


def surviving_sector(nu: int, roots, gp: GaugeParams) -> int:
    """Pick nu or nu + 2, whichever gives a non-vanishing dual on-shell vector.

    chi_{nu+2} = -chi_nu, so both sectors share the same roots, but only one of
    the two Fourier sums survives (ties to the inhomogeneities, not the gauge).
    """
    roots = list(roots)
    norms = [
        dual_bethe_vector_m(k, roots, gp).vector.norm() for k in (nu % 4, (nu + 2) % 4)
    ]
    if max(norms) == 0 or min(norms) > SECTOR_RATIO * max(norms):
        raise DegenerateNormalization(
            f"cannot tell sectors {nu % 4} and {(nu + 2) % 4} apart (norms {norms})"
        )
    return nu % 4 if norms[0] > norms[1] else (nu + 2) % 4


def on_shell_omegas(roots, nu, params) -> np.ndarray:
    """Normalisation factors used by the closed-form scalar products."""
    return omega_and_V(roots, nu, params).Omega_limit


@dataclass
class EigenReport:
    right_residual: float
    left_residual: float
    eigenvalue: complex


def eigen_check(nu: int, vs, z, gp: GaugeParams) -> EigenReport:
    """Relative residuals of the transfer-matrix eigenrelation on both sides."""
    params = gp.params
    right = bethe_vector_m(nu, vs, gp, on_shell=True).vector.amp
    left = dual_bethe_vector_m(nu, vs, gp, on_shell=True).vector.amp
    T = transfer(z, params)
    lam = eigenvalue(nu, z, vs, params)
    rr = np.linalg.norm(T @ right - lam * right) / np.linalg.norm(right)
    lr = np.linalg.norm(left @ T - lam * left) / np.linalg.norm(left)
    return EigenReport(float(rr), float(lr), lam)
