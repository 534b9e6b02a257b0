"""Fourier-side scalar calculus for the dilated free Hamiltonian.

The free symbol f(theta) = 2 - 2 cos(theta), the homography family driving
the scaling group, the scaled symbol and the supporting curve of the scaled
essential spectrum.  The affine map T(z) = 2(1 - z) and the homography are
kept as separate factors so each is testable on its own.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import LatspecError

#: scaling angles are restricted to |theta| < pi/8
THETA_BOUND = np.pi / 8


def affine_t(z):
    """T(z) = 2(1 - z); maps [-1, 1] onto [0, 4] with T(1) = 0, T(-1) = 4."""
    return 2.0 * (1.0 - np.asarray(z))


def affine_t_inv(z):
    return 1.0 - np.asarray(z) / 2.0


def symbol_f(angle):
    """Free symbol 2 - 2 cos(angle) = 4 sin^2(angle/2), valued in [0, 4]."""
    return 2.0 - 2.0 * np.cos(angle)


def _check_theta(theta):
    theta = complex(theta)
    if abs(theta) >= THETA_BOUND:
        raise LatspecError(f"|theta| = {abs(theta):.4f} must stay below pi/8 = {THETA_BOUND:.4f}")
    return theta


def homography_f(theta, lam):
    """Homography F_theta(lam) = (lam - tanh(2 theta)) / (1 - lam tanh(2 theta)).

    F_0 is the identity, F_theta^{-1} = F_{-theta}, the family composes
    additively in theta, and +-1 are the only fixed points for theta != 0.
    """
    theta = _check_theta(theta)
    t = np.tanh(2.0 * theta)
    lam = np.asarray(lam, dtype=complex)
    denom = 1.0 - lam * t
    if np.any(np.abs(denom) < 1e-13):
        raise LatspecError("homography pole: |1 - lam*tanh(2 theta)| < 1e-13")
    out = (lam - t) / denom
    if out.ndim == 0:
        return complex(out)
    return out


def scaled_symbol(theta, angle):
    """Symbol of the dilated free Hamiltonian: T(F_theta(cos(angle)))."""
    theta = _check_theta(theta)
    return affine_t(homography_f(theta, np.cos(np.asarray(angle, dtype=float))))


@dataclass(frozen=True)
class ScaledSpectrumCurve:
    """Supporting curve of the essential spectrum of the dilated free operator.

    For Im(theta) = 0 the curve is the segment [0, 4] on the real axis.
    Otherwise it is the circular arc through the thresholds 0 and 4 with
    midpoint 2 + 2i tan(2 Im theta); ``center``/``radius`` describe the
    supporting circle.  Geometry depends on Im(theta) only.
    """

    theta: complex
    kind: str  # "segment" | "circle-arc"
    center: Optional[complex]
    radius: float
    endpoints: tuple = (0.0, 4.0)
    midpoint: Optional[complex] = None

    def distance(self, z):
        """Distance from a point to the arc (or segment)."""
        z = complex(z)
        if self.kind == "segment":
            x = min(max(z.real, 0.0), 4.0)
            return abs(z - x)
        d_circle = abs(abs(z - self.center) - self.radius)
        if self._angle_on_arc(np.angle(z - self.center)):
            return d_circle
        return min(abs(z - self.endpoints[0]), abs(z - self.endpoints[1]))

    def _angle_on_arc(self, ang):
        a0 = np.angle(self.endpoints[0] - self.center)
        a1 = np.angle(self.endpoints[1] - self.center)
        am = np.angle(self.midpoint - self.center)
        # sweep from a0 towards a1 passing through am
        span = (a1 - a0) % (2 * np.pi)
        mid = (am - a0) % (2 * np.pi)
        if mid > span:  # arc runs the other way around
            span = 2 * np.pi - span
            rel = (a0 - ang) % (2 * np.pi)
        else:
            rel = (ang - a0) % (2 * np.pi)
        return rel <= span + 1e-12

    def sample(self, count=1024):
        """Points on the curve, dense enough for Hausdorff comparisons."""
        lam = np.cos(np.linspace(0.0, np.pi, count))
        if self.kind == "segment":
            return affine_t(lam).astype(complex)
        return affine_t(homography_f(1j * self.theta.imag, lam))


def spectrum_curve(theta) -> ScaledSpectrumCurve:
    """Supporting curve of the scaled essential spectrum for a given angle.

    The circle parameters come from the explicit quadratic relation satisfied
    by F_{iy}([-1, 1]): with t = tan(-2y) the curve in the homography plane
    is the circle of center -i(1-t^2)/(2t) and radius |(1+t^2)/(2t)|, and the
    spectral curve is its image under T(z) = 2(1-z).
    """
    theta = _check_theta(theta)
    y = theta.imag
    if y == 0.0:
        return ScaledSpectrumCurve(theta=theta, kind="segment", center=None, radius=0.0)
    t = np.tan(-2.0 * y)
    center_w = -1j * (1.0 - t * t) / (2.0 * t)
    radius_w = abs((1.0 + t * t) / (2.0 * t))
    center = complex(affine_t(center_w))
    radius = 2.0 * radius_w
    midpoint = complex(affine_t(homography_f(1j * y, 0.0)))
    return ScaledSpectrumCurve(
        theta=theta, kind="circle-arc", center=center, radius=radius, midpoint=midpoint
    )
