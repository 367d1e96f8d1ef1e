"""8-vertex R-matrix, inhomogeneous monodromy, transfer matrix, XYZ Hamiltonian."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import hilbert
from .errors import InvalidParameters, SingularMatrix
from .hilbert import SIGMA_X, SIGMA_Y, SIGMA_Z, OperatorBlock
from .theta import ModularContext, eval_theta, eval_theta_derivative

FREE_FERMION_ETA = Fraction(1, 2)
XI_MIN_SEPARATION = 1e-6


def eta_phase(eta, k) -> complex:
    """exp(i pi eta k), exact for rational eta with denominator dividing 2."""
    if isinstance(eta, Fraction):
        e = (eta * k) % 2
        if e.denominator <= 2:
            return (1, 1j, -1, -1j)[int(2 * e)]
        return complex(np.exp(1j * np.pi * float(e)))
    return complex(np.exp(1j * np.pi * complex(eta) * k))


@dataclass(frozen=True)
class ModelParams:
    N: int
    tau: complex
    xi: tuple
    eta: Fraction | complex = FREE_FERMION_ETA
    ctx: ModularContext = field(default=None, compare=False)

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 2 or self.N % 2:
            raise InvalidParameters(f"N must be even and >= 2, got {self.N}")
        xi = tuple(complex(x) for x in self.xi)
        if len(xi) != self.N:
            raise InvalidParameters(f"need {self.N} inhomogeneities, got {len(xi)}")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "tau", complex(self.tau))
        if self.ctx is None:
            object.__setattr__(self, "ctx", ModularContext(self.tau))
        for i in range(self.N):
            for j in range(i):
                if abs(xi[i] - xi[j]) < XI_MIN_SEPARATION and not self.homogeneous:
                    raise InvalidParameters("inhomogeneities must be pairwise distinct")

    @property
    def n(self) -> int:
        return self.N // 2

    @property
    def homogeneous(self) -> bool:
        return all(x == 0 for x in self.xi)

    @property
    def eta_value(self) -> complex:
        return complex(self.eta) if not isinstance(self.eta, Fraction) else float(self.eta)

    @property
    def dim(self) -> int:
        return 2**self.N

    def th(self, kind, u, period_scale=1):
        return eval_theta(kind, u, self.ctx, period_scale)

    def dth(self, kind, u, period_scale=1):
        return eval_theta_derivative(kind, u, self.ctx, period_scale)

    def phase(self, k) -> complex:
        return eta_phase(self.eta, k)

    def with_xi(self, xi) -> "ModelParams":
        return ModelParams(self.N, self.tau, tuple(xi), self.eta, self.ctx)


def homogeneous_params(N, tau, eta=FREE_FERMION_ETA, ctx=None) -> ModelParams:
    return ModelParams(N, tau, (0j,) * N, eta, ctx)


@dataclass(frozen=True)
class RMatrix:
    u: complex
    entries: np.ndarray


def weights(u, params: ModelParams):
    """(a, b, c, d) Boltzmann weights of the 8-vertex model at spectral parameter u."""
    eta = params.eta_value
    t = params.th
    den = t(2, 0) * t(4, 0, 2)
    a = 2 * t(4, eta, 2) * t(1, u + eta, 2) * t(4, u, 2) / den
    b = 2 * t(4, eta, 2) * t(4, u + eta, 2) * t(1, u, 2) / den
    c = 2 * t(1, eta, 2) * t(4, u + eta, 2) * t(4, u, 2) / den
    d = 2 * t(1, eta, 2) * t(1, u + eta, 2) * t(1, u, 2) / den
    return a, b, c, d


def weight_derivatives(u, params: ModelParams):
    eta = params.eta_value
    t, dt = params.th, params.dth
    den = t(2, 0) * t(4, 0, 2)

    def prod_rule(k1, k2):
        return t(k1, u + eta, 2) * dt(k2, u, 2) + dt(k1, u + eta, 2) * t(k2, u, 2)

    da = 2 * t(4, eta, 2) * prod_rule(1, 4) / den
    db = 2 * t(4, eta, 2) * prod_rule(4, 1) / den
    dc = 2 * t(1, eta, 2) * prod_rule(4, 4) / den
    dd = 2 * t(1, eta, 2) * prod_rule(1, 1) / den
    return da, db, dc, dd


def _assemble(a, b, c, d) -> np.ndarray:
    return np.array(
        [[a, 0, 0, d], [0, b, c, 0], [0, c, b, 0], [d, 0, 0, a]], dtype=complex
    )


def build_r(u, params: ModelParams) -> RMatrix:
    return RMatrix(complex(u), _assemble(*weights(u, params)))


def build_r_derivative(u, params: ModelParams) -> np.ndarray:
    return _assemble(*weight_derivatives(u, params))


def _lax(r4: np.ndarray) -> np.ndarray:
    # R[(a,i),(b,j)] -> L[a, b, i, j]
    return r4.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3)


def _chain(factors) -> np.ndarray:
    t = factors[0]
    for lk in factors[1:]:
        d = t.shape[2]
        t = np.einsum("acij,cbkl->abikjl", t, lk).reshape(2, 2, 2 * d, 2 * d)
    return t


def build_monodromy(u, params: ModelParams) -> OperatorBlock:
    hilbert.check_dim_cap(params.dim)
    factors = [_lax(build_r(u - x, params).entries) for x in params.xi]
    return OperatorBlock(_chain(factors))


def build_monodromy_derivative(u, params: ModelParams) -> OperatorBlock:
    """d/du of the monodromy by the product rule over the R-factors."""
    laxes = [_lax(build_r(u - x, params).entries) for x in params.xi]
    dlaxes = [_lax(build_r_derivative(u - x, params)) for x in params.xi]
    total = None
    for k in range(params.N):
        factors = list(laxes)
        factors[k] = dlaxes[k]
        term = _chain(factors)
        total = term if total is None else total + term
    return OperatorBlock(total)


def transfer(u, params: ModelParams) -> np.ndarray:
    t = build_monodromy(u, params)
    return t.A + t.D


def aux_operator(block: OperatorBlock, space: int) -> np.ndarray:
    """Embed a monodromy into C2 (x) C2 (x) H, acting in auxiliary ``space`` (1 or 2)."""
    d = block.dim
    full = block.full().reshape(2, d, 2, d)
    eye2 = np.eye(2)
    if space == 1:
        out = np.einsum("aibj,cd->acibdj", full, eye2)
    else:
        out = np.einsum("cidj,ab->acibdj", full, eye2)
    return out.reshape(4 * d, 4 * d)


def rtt_residual(u, v, params: ModelParams, relative=False) -> float:
    """Max-norm of R T1 T2 - T2 T1 R; divided by max |R T1 T2| if ``relative``."""
    d = params.dim
    r12 = np.kron(build_r(u - v, params).entries, np.eye(d))
    t1 = aux_operator(build_monodromy(u, params), 1)
    t2 = aux_operator(build_monodromy(v, params), 2)
    lhs = r12 @ t1 @ t2
    rhs = t2 @ t1 @ r12
    diff = float(np.max(np.abs(lhs - rhs)))
    return diff / float(np.max(np.abs(lhs))) if relative else diff


def couplings(params: ModelParams):
    """(J_x, J_y, J_z) of the XYZ chain."""
    eta = params.eta_value
    t = params.th
    return (
        t(4, eta) / t(4, 0),
        t(3, eta) / t(3, 0),
        t(2, eta) / t(2, 0),
    )


def hamiltonian_direct(params: ModelParams) -> np.ndarray:
    N = params.N
    jx, jy, jz = couplings(params)
    H = np.zeros((params.dim, params.dim), dtype=complex)
    for j in range(1, N + 1):
        k = j % N + 1
        for J, s in ((jx, SIGMA_X), (jy, SIGMA_Y), (jz, SIGMA_Z)):
            H += J * hilbert.site_operator(s, j, N) @ hilbert.site_operator(s, k, N)
    return H


def hamiltonian_log_derivative(params: ModelParams) -> np.ndarray:
    if not params.homogeneous:
        raise InvalidParameters("the log-derivative Hamiltonian needs xi = 0")
    eta = params.eta_value
    t0 = build_monodromy(0.0, params)
    dt0 = build_monodromy_derivative(0.0, params)
    T0 = t0.A + t0.D
    dT0 = dt0.A + dt0.D
    try:
        log_deriv = hilbert.solve(T0, dT0)
    except SingularMatrix as exc:
        raise SingularMatrix("transfer matrix at u=0 is not invertible") from exc
    d1 = params.dth(1, 0.0)
    return (2 * params.th(1, eta) / d1) * log_deriv - (
        params.dth(1, eta) / d1
    ) * params.N * np.eye(params.dim)
