"""Dense complex linear algebra, special-function branches and contour quadrature.

Every other module consumes these primitives.  All functions are pure;
matrices are plain ``numpy.ndarray`` and are never mutated.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import BranchProximityWarning, ContourError, EigenConvergenceError, OverflowGuardError

#: residual contract of eig_dense, relative to the matrix norm
EIG_RESIDUAL_TOL = 1e-10

#: mat_exp refuses matrices beyond this 2-norm estimate
MAT_EXP_NORM_CAP = 300.0


def _as_square(m):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def is_hermitian(m, tol=0.0):
    """True when ``m`` equals its conjugate transpose entrywise (within tol)."""
    m = np.asarray(m)
    if tol == 0.0:
        return np.array_equal(m, m.conj().T)
    return np.max(np.abs(m - m.conj().T)) <= tol * max(1.0, np.max(np.abs(m)))


def eig_dense(m):
    """Full eigendecomposition of a dense square matrix.

    Hermitian inputs dispatch to the Hermitian solver and come back with a
    real spectrum sorted ascending and an orthonormal eigenbasis.  General
    inputs use the nonsymmetric QR solver.  Every returned pair satisfies
    ``|m v - lam v| <= 1e-10 |m|``; a violation raises
    :class:`EigenConvergenceError` with the worst residual.

    Parameters
    ----------
    m : (d, d) array_like
        Square matrix with finite entries.

    Returns
    -------
    eigenvalues : (d,) ndarray
    eigenvectors : (d, d) ndarray
        Right eigenvectors as columns, aligned with ``eigenvalues``.
    """
    m = _as_square(m)
    if is_hermitian(m):
        lam, vec = np.linalg.eigh(m)
    else:
        lam, vec = np.linalg.eig(m)
    scale = np.linalg.norm(m, 2) if m.shape[0] <= 2 else np.linalg.norm(m, "fro")
    resid = np.linalg.norm(m @ vec - vec * lam[None, :], axis=0)
    worst = float(resid.max()) if resid.size else 0.0
    if worst > EIG_RESIDUAL_TOL * max(scale, 1e-300):
        raise EigenConvergenceError(
            f"eigen residual {worst:.3e} exceeds {EIG_RESIDUAL_TOL:.0e}*|M| = "
            f"{EIG_RESIDUAL_TOL * scale:.3e} (dimension {m.shape[0]})"
        )
    return lam, vec


def mat_exp(m):
    """Matrix exponential by scaling-and-squaring.

    Refuses inputs whose norm would exhaust double precision; the caller
    should reduce the scaling angle or the window in that case.
    """
    m = _as_square(m)
    nrm = float(np.linalg.norm(m, 1))
    if nrm > MAT_EXP_NORM_CAP:
        raise OverflowGuardError(
            f"matrix 1-norm {nrm:.1f} exceeds {MAT_EXP_NORM_CAP}; reduce theta or window"
        )
    return sla.expm(np.asarray(m, dtype=complex))


def principal_sqrt(z):
    """Square root with values in the closed upper half-plane.

    Agrees with the usual principal branch on the closed upper half-plane
    and flips the sign below it, so Im(result) >= 0 always and on both real
    half-axes the value is the limit from above.  ``result**2 == z`` in
    either case.
    """
    z = complex(z)
    s = complex(np.sqrt(complex(z)))
    if z.imag < 0.0:
        return -s
    return s


def _clog1p(x):
    """log(1 + x) for complex x without cancellation near x = 0."""
    x = complex(x)
    mod = 0.5 * np.log1p(2.0 * x.real + x.real * x.real + x.imag * x.imag)
    return complex(mod, np.arctan2(x.imag, 1.0 + x.real))


def arcsin_principal(w):
    """Principal inverse sine, computed as -i log(iw + sqrt(1 - w^2)).

    Analytic on the open unit disk (and beyond, off the real rays |w| >= 1)
    with arcsin(w) = w + w^3/6 + O(w^5) near zero.  The logarithm is taken
    in log1p form, i w - w^2/(1 + sqrt(1 - w^2)), to keep full accuracy for
    small arguments.  Callers keep |w| < 1; approaching the cuts triggers
    :class:`BranchProximityWarning`.
    """
    w = complex(w)
    if abs(w) > 0.99:
        warnings.warn(
            f"arcsin argument |w|={abs(w):.4f} close to the branch points +-1",
            BranchProximityWarning,
            stacklevel=2,
        )
    c = complex(np.sqrt(1.0 - w * w))
    return complex(-1j * _clog1p(1j * w - w * w / (1.0 + c)))


@dataclass(frozen=True)
class Contour:
    """Positively oriented circle with equispaced quadrature nodes."""

    center: complex
    radius: float
    node_count: int = 256

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("contour radius must be positive")
        if self.node_count < 16 or self.node_count % 2:
            raise ValueError("node_count must be an even integer >= 16")

    def nodes(self):
        """Quadrature nodes on the circle, counter-clockwise from angle 0."""
        phi = 2.0 * np.pi * np.arange(self.node_count) / self.node_count
        return self.center + self.radius * np.exp(1j * phi)

    def doubled(self):
        return Contour(self.center, self.radius, 2 * self.node_count)


def contour_quadrature(f, contour):
    """Trapezoidal approximation of (1/2*pi*i) * closed integral of f.

    Spectrally accurate for integrands analytic in an annulus around the
    circle.  A non-finite integrand value aborts with the offending node.
    """
    phi = 2.0 * np.pi * np.arange(contour.node_count) / contour.node_count
    rot = np.exp(1j * phi)
    total = 0.0 + 0.0j
    for j, w in enumerate(rot):
        z = contour.center + contour.radius * w
        val = f(z)
        if not np.isfinite(val):
            raise ContourError(f"integrand not finite at node {j} (z = {z})")
        total += val * w
    return total * contour.radius / contour.node_count


def operator_norm(m):
    """Spectral norm (largest singular value) of a dense matrix."""
    return float(np.linalg.norm(np.asarray(m), 2))
