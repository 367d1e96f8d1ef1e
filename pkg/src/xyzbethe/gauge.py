"""Gauge matrices, gauge-transformed monodromy and the gauge vacua.

Gauge indices are plain integers and are never reduced modulo 4, even where
eta = 1/2 would make a quantity periodic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import hilbert
from .errors import GaugeSingularity, SingularMatrix
from .hilbert import DualVector, OperatorBlock, StateVector
from .vertex import ModelParams, build_monodromy

GAUGE_TOL = 1e-9


@dataclass(frozen=True)
class GaugeParams:
    s: complex
    t: complex
    params: ModelParams

    def __post_init__(self):
        object.__setattr__(self, "s", complex(self.s))
        object.__setattr__(self, "t", complex(self.t))
        th = self.params.th
        for label, val in (
            ("theta2(x)", th(2, self.x)),
            ("theta1(x)", th(1, self.x)),
        ):
            if abs(val) < GAUGE_TOL:
                raise GaugeSingularity(f"{label} vanishes for s={self.s}, t={self.t}")

    @property
    def x(self) -> complex:
        return (self.s + self.t) / 2

    @property
    def y(self) -> complex:
        return (self.s - self.t) / 2

    def _shift(self, base, k):
        return base + k * self.params.eta_value

    def s_k(self, k):
        return self._shift(self.s, k)

    def t_k(self, k):
        return self._shift(self.t, k)

    def x_k(self, k):
        return self._shift(self.x, k)

    def gamma(self, k) -> complex:
        th = self.params.th
        den = th(2, self.x_k(k)) * th(2, 0)
        if abs(den) < GAUGE_TOL:
            raise GaugeSingularity(f"gamma_{k} is infinite")
        return 2 / den

    def check_window(self, window: "GaugeIndexWindow"):
        for k in range(window.lo, window.hi + 1):
            self.gamma(k)


@dataclass(frozen=True)
class GaugeIndexWindow:
    lo: int
    hi: int

    def __contains__(self, k):
        return self.lo <= k <= self.hi


def sample_gauge(params: ModelParams, rng, box=0.4, max_tries=1000) -> GaugeParams:
    """Draw (s, t) with real and imaginary parts in [-box, box], rejecting
    draws close to the singular loci used anywhere in the package."""
    th = params.th
    for _ in range(max_tries):
        s, t = (complex(*rng.uniform(-box, box, size=2)) for _ in range(2))
        try:
            gp = GaugeParams(s, t, params)
        except GaugeSingularity:
            continue
        x = gp.x
        checks = [th(2, gp.x_k(k)) for k in range(4)]
        checks += [th(1, gp.x_k(k)) for k in range(4)]
        checks += [th(1, 2 * x, 2), th(1, x + 0.5)]
        if min(abs(c) for c in checks) > 1e-3:
            return gp
    raise GaugeSingularity("could not sample a generic gauge")


def gauge_matrix(k: int, u, gp: GaugeParams) -> np.ndarray:
    th = gp.params.th
    g = gp.gamma(k)
    sk, tk = gp.s_k(k), gp.t_k(k)
    return np.array(
        [
            [th(1, sk + u, 2), g * th(1, tk - u, 2)],
            [th(4, sk + u, 2), g * th(4, tk - u, 2)],
        ],
        dtype=complex,
    )


def gauge_det(u, gp: GaugeParams) -> complex:
    """Closed-form determinant of M_k(u); independent of k."""
    th = gp.params.th
    return 2 * th(1, gp.y + u) / th(2, 0)


def gauge_matrix_inverse(k: int, u, gp: GaugeParams) -> np.ndarray:
    m = gauge_matrix(k, u, gp)
    return hilbert.inv(m)


def gauge_monodromy(k: int, l: int, u, gp: GaugeParams, monodromy=None) -> OperatorBlock:
    """M_k(u)^{-1} T(u) M_l(u)."""
    if monodromy is None:
        monodromy = build_monodromy(u, gp.params)
    try:
        mk_inv = gauge_matrix_inverse(k, u, gp)
    except SingularMatrix as exc:
        raise SingularMatrix(f"M_{k}({u}) is not invertible") from exc
    return monodromy.sandwich(mk_inv, gauge_matrix(l, u, gp))


def c_bar(k: int, l: int, u, gp: GaugeParams, monodromy=None) -> np.ndarray:
    return gp.gamma(k) * gp.gamma(l) * gauge_monodromy(k, l, u, gp, monodromy).C


def local_vacuum(site: int, l: int, gp: GaugeParams) -> np.ndarray:
    th = gp.params.th
    arg = gp.s_k(site + l - 1) + gp.params.xi[site - 1]
    return np.array([th(1, arg, 2), th(4, arg, 2)], dtype=complex)


def local_dual_vacuum(site: int, l: int, gp: GaugeParams) -> np.ndarray:
    th = gp.params.th
    arg = gp.t_k(site + l) - gp.params.xi[site - 1]
    return np.array([-th(4, arg, 2), th(1, arg, 2)], dtype=complex)


def vacuum(l: int, gp: GaugeParams) -> StateVector:
    N = gp.params.N
    return StateVector(hilbert.kron([local_vacuum(k, l, gp) for k in range(1, N + 1)]))


def dual_vacuum(l: int, gp: GaugeParams) -> DualVector:
    N = gp.params.N
    return DualVector(hilbert.kron([local_dual_vacuum(k, l, gp) for k in range(1, N + 1)]))


def a_func(u, params: ModelParams) -> complex:
    eta = params.eta_value
    return complex(np.prod([params.th(1, u - x + eta) for x in params.xi]))


def d_func(u, params: ModelParams) -> complex:
    return complex(np.prod([params.th(1, u - x) for x in params.xi]))
