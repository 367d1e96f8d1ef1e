"""Jacobi theta functions of complex argument.

Conventions (q = exp(i*pi*tau))::

    theta1(u|tau) = -i sum_k (-1)^k q^{(k+1/2)^2} exp(i*pi*(2k+1)*u)
    theta2(u|tau) =    sum_k        q^{(k+1/2)^2} exp(i*pi*(2k+1)*u)
    theta3(u|tau) =    sum_k        q^{k^2}       exp(2*pi*i*k*u)
    theta4(u|tau) =    sum_k (-1)^k q^{k^2}       exp(2*pi*i*k*u)

The argument is first reduced to ``0 <= Re u < 1``, ``|Im u| <= Im tau / 2``
using the quasi-periodicity under ``u -> u + 1`` and ``u -> u + tau``; the
multiplier is reapplied afterwards. After reduction every term is bounded by
``exp(-pi Im tau (j^2 - |j|))`` so the truncation order depends only on tau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import InvalidModulus, TruncationOverflow

__all__ = [
    "ModularContext",
    "EllipticPoint",
    "reduce_argument",
    "eval_theta",
    "eval_theta_derivative",
    "eval_theta1_derivative",
    "theta_series_direct",
]

# half-integer offset, alternating sign, overall factor
_KIND = {
    1: (0.5, True, -1j),
    2: (0.5, False, 1.0),
    3: (0.0, False, 1.0),
    4: (0.0, True, 1.0),
}
# theta_a(u + 1) = _SHIFT_ONE[a] * theta_a(u)
_SHIFT_ONE = {1: -1, 2: -1, 3: 1, 4: 1}
# theta_a(u + tau) = _SHIFT_TAU[a] * exp(-i pi (2u + tau)) * theta_a(u)
_SHIFT_TAU = {1: -1, 2: 1, 3: 1, 4: -1}


@dataclass(frozen=True)
class ModularContext:
    """Modular parameter plus the truncation policy shared by all evaluations."""

    tau: complex
    eps_target: float = 1e-14
    k_max_cap: int = 64
    im_floor: float = 0.05

    def __post_init__(self):
        tau = complex(self.tau)
        object.__setattr__(self, "tau", tau)
        if not math.isfinite(tau.real) or not math.isfinite(tau.imag):
            raise InvalidModulus(f"tau must be finite, got {tau}")
        if tau.imag < self.im_floor:
            raise InvalidModulus(
                f"Im tau = {tau.imag:g} is below the floor {self.im_floor:g}"
            )

    @property
    def q(self) -> complex:
        return complex(np.exp(1j * np.pi * self.tau))

    def period(self, period_scale: int = 1) -> complex:
        if period_scale not in (1, 2):
            raise ValueError("period_scale must be 1 or 2")
        return period_scale * self.tau

    def truncation(self, period_scale: int = 1) -> int:
        return self._truncations[period_scale]

    @cached_property
    def _truncations(self) -> dict:
        out = {}
        for scale in (1, 2):
            im_t = scale * self.tau.imag
            if im_t < self.im_floor:
                raise InvalidModulus(f"Im({scale} tau) below floor")
            out[scale] = _truncation_order(im_t, self.eps_target, self.k_max_cap)
        return out


def _truncation_order(im_tau: float, eps: float, cap: int) -> int:
    # after reduction |Im u| <= im_tau/2; bound the tail of |j| >= K+1
    # including the extra 2*pi*|j| factor of the derivative series
    for K in range(1, cap + 1):
        j = K + 1.0
        log_term = -math.pi * im_tau * (j * j - j)
        rho = math.exp(-math.pi * im_tau * 2.0 * j)
        if rho >= 1.0:
            continue
        bound = 2.0 * math.exp(log_term) / (1.0 - rho) ** 2 * (1.0 + 2.0 * math.pi * j)
        if bound < eps:
            return K
    raise TruncationOverflow(
        f"truncation order would exceed k_max_cap={cap} for Im tau={im_tau:g}"
    )


class EllipticPoint(NamedTuple):
    """Reduced argument ``u`` with the lattice shifts ``(m, n)`` removed:
    original = u + m + n * tau."""

    u: complex | np.ndarray
    half_period_shifts: tuple


def reduce_argument(u, tau: complex) -> EllipticPoint:
    u = np.asarray(u, dtype=complex)
    n = np.rint(u.imag / tau.imag)
    u1 = u - n * tau
    m = np.floor(u1.real)
    ur = u1 - m
    return EllipticPoint(ur, (m, n))


def _series(kind: int, ur: np.ndarray, tau: complex, K: int, deriv: bool):
    offset, alternating, pref = _KIND[kind]
    if offset:
        ks = np.arange(-K - 1, K + 1, dtype=float)
    else:
        ks = np.arange(-K, K + 1, dtype=float)
    j = ks + offset
    signs = np.where(ks % 2 == 0, 1.0, -1.0) if alternating else np.ones_like(ks)
    # single exponent per term keeps q^{j^2} from underflowing separately
    expo = 1j * np.pi * (tau * j * j + 2.0 * j * ur[..., None])
    terms = signs * np.exp(expo)
    if deriv:
        terms = terms * (2j * np.pi * j)
    return pref * terms.sum(axis=-1)


def _multiplier(kind: int, ur, m, n, tau):
    sign = np.where(m % 2 == 0, 1.0, float(_SHIFT_ONE[kind]))
    sign = sign * np.where(n % 2 == 0, 1.0, float(_SHIFT_TAU[kind]))
    return sign * np.exp(-1j * np.pi * (2.0 * n * ur + n * n * tau))


def _check(kind: int, ctx: ModularContext, period_scale: int):
    if kind not in _KIND:
        raise ValueError(f"theta kind must be 1..4, got {kind}")
    tau = ctx.period(period_scale)
    if tau.imag < ctx.im_floor:
        raise InvalidModulus(f"Im tau below floor for period_scale={period_scale}")
    return tau, ctx.truncation(period_scale)


def _out(val, like):
    if np.ndim(like) == 0:
        return complex(val)
    return val


def eval_theta(kind: int, u, ctx: ModularContext, period_scale: int = 1):
    """theta_kind(u | period_scale * tau). Accepts scalars or arrays."""
    tau, K = _check(kind, ctx, period_scale)
    ur, (m, n) = reduce_argument(u, tau)
    val = _multiplier(kind, ur, m, n, tau) * _series(kind, ur, tau, K, False)
    return _out(val, u)


def eval_theta_derivative(kind: int, u, ctx: ModularContext, period_scale: int = 1):
    """d/du theta_kind(u | period_scale * tau), term-wise differentiated."""
    tau, K = _check(kind, ctx, period_scale)
    ur, (m, n) = reduce_argument(u, tau)
    mult = _multiplier(kind, ur, m, n, tau)
    val = _series(kind, ur, tau, K, True)
    if np.any(n != 0):
        val = val - 2j * np.pi * n * _series(kind, ur, tau, K, False)
    return _out(mult * val, u)


def eval_theta1_derivative(u, ctx: ModularContext, period_scale: int = 1):
    return eval_theta_derivative(1, u, ctx, period_scale)


def theta_series_direct(kind: int, u: complex, tau: complex, terms: int = 200) -> complex:
    """Plain symmetric partial sum without argument reduction (reference only)."""
    offset, alternating, pref = _KIND[kind]
    total = 0j
    for k in range(-terms, terms + 1):
        j = k + offset
        s = (-1) ** (k % 2) if alternating else 1
        total += s * np.exp(1j * np.pi * (tau * j * j + 2 * j * u))
    return complex(pref * total)
