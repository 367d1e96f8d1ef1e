import sys

import numpy as np
import pytest
from hypothesis import strategies as st

from xyzbethe.checks import Setup
from xyzbethe.vertex import build_r

TAU = 0.1 + 0.8j


def cbox(lo=-0.5, hi=0.5):
    """Complex numbers with real and imaginary parts in [lo, hi]."""
    part = st.floats(lo, hi, allow_nan=False, allow_infinity=False)
    return st.builds(complex, part, part)


def taus():
    return st.builds(
        complex,
        st.floats(-0.5, 0.5, allow_nan=False),
        st.floats(0.4, 1.5, allow_nan=False),
    )


def rel(a, b):
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)))
    return float(np.max(np.abs(a - b)) / scale) if scale else 0.0


def loop_monodromy(u, params):
    """T_ab = sum_c L1_ac (x) L2_cb ... written out as nested loops."""
    laxes = []
    for x in params.xi:
        R = build_r(u - x, params).entries
        L = np.zeros((2, 2, 2, 2), dtype=complex)
        for a in range(2):
            for b in range(2):
                for i in range(2):
                    for j in range(2):
                        L[a, b, i, j] = R[2 * a + i, 2 * b + j]
        laxes.append(L)
    T = laxes[0]
    for L in laxes[1:]:
        d = T.shape[2]
        new = np.zeros((2, 2, 2 * d, 2 * d), dtype=complex)
        for a in range(2):
            for b in range(2):
                for c in range(2):
                    new[a, b] += np.kron(T[a, c], L[c, b])
        T = new
    return T


@pytest.fixture(scope="session")
def setup2():
    return Setup(0, 2, TAU)


@pytest.fixture(scope="session")
def setup4():
    return Setup(0, 4, TAU)


@pytest.fixture(scope="session")
def setup6():
    return Setup(0, 6, TAU)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[key])
