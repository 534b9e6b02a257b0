"""Shared fixtures and independent oracles used across the suite."""

import numpy as np
import pytest
from scipy.linalg import solve_banded

from latspec.lattice import Window


def resolvent_oracle(z, n, half_width=2000):
    """Free-resolvent entry <e_n, (H0 - z)^{-1} e_0> by a banded linear solve.

    Independent of every kernel formula in the package: builds the
    tridiagonal system on a wide window and solves for the central column.
    """
    d = 2 * half_width + 1
    ab = np.zeros((3, d), dtype=complex)
    ab[0, 1:] = -1.0
    ab[1, :] = 2.0 - z
    ab[2, :-1] = -1.0
    rhs = np.zeros(d, dtype=complex)
    rhs[half_width] = 1.0
    x = solve_banded((1, 1), ab, rhs)
    return x[half_width + n]


def central_difference(f, x, h):
    """Two-sided difference quotient, the derivative oracle."""
    return (f(x + h) - f(x - h)) / (2.0 * h)


def hausdorff(points_a, points_b):
    a = np.asarray(points_a).ravel()
    b = np.asarray(points_b).ravel()
    d1 = max(np.min(np.abs(b - x)) for x in a)
    d2 = max(np.min(np.abs(a - x)) for x in b)
    return max(d1, d2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def small_window():
    return Window(8)
