import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xyzbethe import hilbert
from xyzbethe.errors import DimensionMismatch, DimensionOverflow, SingularMatrix
from xyzbethe.hilbert import (
    SIGMA_Z,
    DualVector,
    OperatorBlock,
    StateVector,
    det,
    inv,
    kron,
    pair,
    parity_operator,
    site_operator,
    solve,
)


def cofactor_det(m):
    n = m.shape[0]
    if n == 1:
        return m[0, 0]
    return sum((-1) ** j * m[0, j] * cofactor_det(np.delete(m[1:], j, axis=1)) for j in range(n))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 5), seed=st.integers(0, 2**32 - 1))
def test_det_matches_cofactor_expansion(n, seed):
    r = np.random.default_rng(seed)
    m = r.normal(size=(n, n)) + 1j * r.normal(size=(n, n))
    ref = cofactor_det(m)
    assert abs(det(m) - ref) <= 1e-12 * max(1.0, abs(ref)) * n


def test_det_of_singular_is_zero_without_warning():
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert det(np.zeros((3, 3))) == 0
    assert det(np.zeros((0, 0))) == 1


def test_inv_and_solve(rng):
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert np.allclose(inv(m) @ m, np.eye(4), atol=1e-12)
    b = rng.normal(size=4)
    assert np.allclose(m @ solve(m, b), b, atol=1e-12)


def test_singular_inverse_raises():
    with pytest.raises(SingularMatrix):
        inv(np.array([[1, 2], [2, 4]]))
    with pytest.raises(SingularMatrix):
        inv(np.diag([1.0, 1e-14]))


def test_pairing_is_bilinear():
    # no complex conjugation anywhere
    v = StateVector(np.array([1j, 0]))
    w = DualVector(np.array([1j, 0]))
    assert pair(w, v) == -1
    assert pair(w.amp, v.amp) == -1


def test_pair_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        pair(DualVector(np.ones(2)), StateVector(np.ones(4)))


def test_vector_validation():
    with pytest.raises(DimensionMismatch):
        StateVector(np.ones(3))
    with pytest.raises(DimensionMismatch):
        StateVector(np.ones((2, 2)))
    with pytest.raises(ValueError):
        DualVector(np.array([1, np.nan]))


def test_site_ordering():
    # site 1 is the most significant factor
    up, down = np.array([1, 0]), np.array([0, 1])
    assert np.argmax(kron([down, up, up])) == 4
    z1 = site_operator(SIGMA_Z, 1, 3)
    assert np.allclose(np.diag(z1), [1, 1, 1, 1, -1, -1, -1, -1])


def test_parity_is_product_of_sigma_z():
    p = parity_operator(3)
    ref = site_operator(SIGMA_Z, 1, 3) @ site_operator(SIGMA_Z, 2, 3) @ site_operator(SIGMA_Z, 3, 3)
    assert np.array_equal(p, ref)


def test_dim_cap():
    with pytest.raises(DimensionOverflow):
        kron([np.eye(2)] * 11)
    hilbert.check_dim_cap(2**10)


def test_operator_block_full_and_sandwich(rng):
    b = rng.normal(size=(2, 2, 4, 4)) + 0j
    blk = OperatorBlock(b)
    full = blk.full()
    assert np.array_equal(full[:4, 4:], blk.B)
    assert np.array_equal(full[4:, :4], blk.C)
    left, right = rng.normal(size=(2, 2)), rng.normal(size=(2, 2))
    ref = np.kron(left, np.eye(4)) @ full @ np.kron(right, np.eye(4))
    assert np.allclose(blk.sandwich(left, right).full(), ref)
    with pytest.raises(DimensionMismatch):
        OperatorBlock(np.zeros((2, 2, 3, 4)))
