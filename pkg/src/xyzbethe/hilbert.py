"""Dense linear algebra on the 2^N spin space.

Basis convention: site 1 is the most significant tensor factor, and local
index 0 is the first component of a site vector. The pairing between a dual
(row) vector and a state is bilinear; nothing is ever complex-conjugated.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, DimensionOverflow, SingularMatrix

DIM_CAP = 2**10
PIVOT_RTOL = 1e-13
COND_MAX = 1e12

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)


def _check_dim(dim: int) -> int:
    if dim <= 0 or dim & (dim - 1):
        raise DimensionMismatch(f"dimension {dim} is not a power of two")
    return dim


def _as_amp(amp) -> np.ndarray:
    amp = np.asarray(amp, dtype=complex)
    if amp.ndim != 1:
        raise DimensionMismatch("amplitudes must be one-dimensional")
    _check_dim(amp.shape[0])
    if not np.all(np.isfinite(amp)):
        raise ValueError("amplitudes contain NaN or Inf")
    return amp


@dataclass(frozen=True)
class StateVector:
    amp: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "amp", _as_amp(self.amp))

    @property
    def dim(self) -> int:
        return self.amp.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amp))


@dataclass(frozen=True)
class DualVector:
    """Row functional on the spin space (not the adjoint of a state)."""

    amp: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "amp", _as_amp(self.amp))

    @property
    def dim(self) -> int:
        return self.amp.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amp))


@dataclass(frozen=True)
class OperatorBlock:
    """2x2 auxiliary-space matrix of dim x dim operators, stored as (2, 2, dim, dim)."""

    blocks: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.blocks, dtype=complex)
        if b.ndim != 4 or b.shape[:2] != (2, 2) or b.shape[2] != b.shape[3]:
            raise DimensionMismatch(f"bad operator block shape {b.shape}")
        object.__setattr__(self, "blocks", b)

    @property
    def dim(self) -> int:
        return self.blocks.shape[2]

    @property
    def A(self):
        return self.blocks[0, 0]

    @property
    def B(self):
        return self.blocks[0, 1]

    @property
    def C(self):
        return self.blocks[1, 0]

    @property
    def D(self):
        return self.blocks[1, 1]

    def full(self) -> np.ndarray:
        """Matrix on aux (x) quantum space, aux index most significant."""
        d = self.dim
        return self.blocks.transpose(0, 2, 1, 3).reshape(2 * d, 2 * d)

    def sandwich(self, left: np.ndarray, right: np.ndarray) -> "OperatorBlock":
        """left @ T @ right for 2x2 scalar matrices acting on the aux space."""
        return OperatorBlock(np.einsum("ac,cdij,db->abij", left, self.blocks, right))


def check_dim_cap(dim: int, cap: int = DIM_CAP) -> int:
    if dim > cap:
        raise DimensionOverflow(f"dimension {dim} exceeds cap {cap}")
    return dim


def kron(ops, cap: int = DIM_CAP) -> np.ndarray:
    ops = [np.asarray(o, dtype=complex) for o in ops]
    if not ops:
        raise ValueError("kron needs at least one factor")
    dim = 1
    for o in ops:
        dim *= o.shape[0]
    check_dim_cap(dim, cap)
    return reduce(np.kron, ops)


def site_operator(op, site: int, n_sites: int) -> np.ndarray:
    """Embed a one-site operator at ``site`` (1-based)."""
    factors = [IDENTITY2] * n_sites
    factors[site - 1] = op
    return kron(factors)


def parity_operator(n_sites: int) -> np.ndarray:
    """U3 = sigma^z on every site, returned as its (diagonal) dense matrix."""
    return kron([SIGMA_Z] * n_sites)


def pair(dual, state) -> complex:
    d = dual.amp if isinstance(dual, DualVector) else np.asarray(dual)
    s = state.amp if isinstance(state, StateVector) else np.asarray(state)
    if d.shape != s.shape:
        raise DimensionMismatch(f"cannot pair {d.shape} with {s.shape}")
    return complex(np.dot(d, s))


def _lu_factor(m):
    # singular input is reported by the callers, not by scipy
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        return scipy.linalg.lu_factor(m, check_finite=True)


def _lu(m):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got {m.shape}")
    scale = np.max(np.abs(m)) if m.size else 0.0
    lu, piv = _lu_factor(m)
    pivots = np.diag(lu)
    if scale == 0.0 or np.min(np.abs(pivots)) < PIVOT_RTOL * scale:
        raise SingularMatrix("pivot below 1e-13 * scale")
    return lu, piv


def det(m) -> complex:
    m = np.asarray(m, dtype=complex)
    if m.shape == (0, 0):
        return 1.0 + 0j
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got {m.shape}")
    # a vanishing determinant is a legitimate answer here, so no pivot guard
    lu, piv = _lu_factor(m)
    sign = (-1) ** int(np.sum(piv != np.arange(len(piv))))
    return complex(sign * np.prod(np.diag(lu)))


def _conditioned(m):
    lu_piv = _lu(m)
    if np.linalg.cond(m) > COND_MAX:
        raise SingularMatrix("condition number above 1e12")
    return lu_piv


def inv(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    lu_piv = _conditioned(m)
    return scipy.linalg.lu_solve(lu_piv, np.eye(m.shape[0], dtype=complex))


def solve(m, rhs) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    return scipy.linalg.lu_solve(_conditioned(m), np.asarray(rhs, dtype=complex))


def eigvals(m) -> np.ndarray:
    """Dense eigenvalues, kept only for the Hamiltonian cross-check."""
    return np.linalg.eigvals(np.asarray(m, dtype=complex))
