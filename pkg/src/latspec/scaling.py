"""Complex scaling of the lattice Hamiltonian on finite windows.

Builds the dilated free operator from its Fourier symbol, conjugates
perturbations by the analytic scaling group, and classifies eigenvalues of
the scaled truncations into window-stable discrete candidates versus
essential-curve artifacts.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import LatspecError, MarginError, OverflowGuardError
from .lattice import Perturbation, Window, build_a0, build_h0
from .numerics import mat_exp
from .symbols import ScaledSpectrumCurve, THETA_BOUND, homography_f, scaled_symbol, spectrum_curve

#: machine epsilon used by the conjugation conditioning guard
_EPS = np.finfo(float).eps

#: default absolute accuracy demanded of the conjugated perturbation
CONJUGATION_TOL = 1e-8


def flow_phi(theta, angle):
    """Angle flow of the scaling group on the torus.

    phi_theta(angle) = sign(angle) * arccos((cos(angle) - tanh(2 theta)) /
    (1 - tanh(2 theta) cos(angle))); the family composes additively in theta
    and satisfies cos(flow_phi(theta, x)) = F_theta(cos x) identically.
    """
    theta = complex(theta)
    if abs(theta) > 0.12:
        warnings.warn(
            f"|theta| = {abs(theta):.3f} beyond the probed analyticity radius 0.12 of the flow",
            stacklevel=2,
        )
    x = float(angle)
    # normalize to (-pi, pi]; the endpoints are fixed points of the flow
    x = (x + np.pi) % (2.0 * np.pi) - np.pi
    arg = homography_f(theta, np.cos(x))
    # principal arccos via arcsin keeps values continuous near the fixed points
    acos = np.pi / 2.0 - complex(-1j * np.log(1j * arg + np.sqrt(1.0 - arg * arg)))
    if x >= 0:
        return acos
    return -acos


def scaled_h0_matrix(theta, window: Window, fourier_nodes=None):
    """Dilated free Hamiltonian as a Toeplitz matrix of symbol coefficients.

    Entry (n, m) is the (n-m)-th Fourier coefficient of the scaled symbol,
    computed by trapezoidal quadrature over ``fourier_nodes`` angles (the
    symbol is analytic, so the coefficients converge geometrically and the
    aliasing tail is checked).  At theta = 0 the interior reproduces the
    plain tridiagonal Laplacian.
    """
    theta = complex(theta)
    if abs(theta) >= THETA_BOUND:
        raise LatspecError(f"|theta| must stay below pi/8, got {abs(theta):.4f}")
    d = window.dimension
    nodes = 8 * d if fourier_nodes is None else int(fourier_nodes)
    if nodes < 8 * d:
        raise LatspecError(f"fourier_nodes = {nodes} below the 8*(2N+1) = {8 * d} minimum")
    angles = 2.0 * np.pi * np.arange(nodes) / nodes
    coeff = np.fft.fft(scaled_symbol(theta, angles)) / nodes
    tail = np.max(np.abs(coeff[d : nodes - d + 1])) if nodes > 2 * d else np.inf
    if tail > 1e-12:
        raise LatspecError(
            f"aliasing detected: coefficient tail {tail:.2e} > 1e-12; increase fourier_nodes"
        )
    col = coeff[np.arange(d) % nodes]
    row = coeff[(-np.arange(d)) % nodes]
    return sla.toeplitz(col, row)


def apply_scaling_group(theta, window: Window, vec, tol=1e-16, max_terms=120):
    """Apply exp(i theta A0) to a vector by its power series.

    Converges geometrically for |theta| < 1/2 on analytic vectors; the
    series path is numerically stable where the dense exponential would
    lose digits to its huge norm.  The window must be wide enough that the
    spreading iterates never carry weight to the boundary.
    """
    a0 = build_a0(window)
    out = np.asarray(vec, dtype=complex).copy()
    term = out.copy()
    for k in range(1, max_terms):
        term = (1j * complex(theta) / k) * (a0 @ term)
        out += term
        if np.linalg.norm(term) < tol * np.linalg.norm(out):
            break
    else:
        raise LatspecError("scaling-group series did not converge; reduce |theta|")
    edge = max(float(np.abs(out[0])), float(np.abs(out[-1])))
    if edge > 1e-10 * np.linalg.norm(out):
        warnings.warn(
            f"scaling-group iterates reach the window boundary (edge mass {edge:.2e}); widen the window",
            stacklevel=2,
        )
    return out


def _default_margin(v: Perturbation):
    rate = v.decay.delta if v.decay is not None else 1.0
    return int(np.ceil(6.0 / rate)) + 20


def _conjugation_condition(theta, dimension):
    """Loss-of-precision estimate for the restricted exponential conjugation.

    The generator's truncation has spectral radius about the dimension, so
    one exponential factor reaches norm exp(|Im theta| * rho).  Restriction
    to the core window discards the boundary rows where the inverse factor
    is large, leaving roundoff at roughly eps times a single factor's norm
    (measured against series conjugation in the tests).
    """
    rho = float(dimension)
    return np.exp(abs(complex(theta).imag) * rho) * _EPS


def scaled_perturbation(theta, v: Perturbation, window: Window, margin=None, check_margin=True):
    """Conjugated perturbation exp(i theta A0) V exp(-i theta A0) on the window.

    The conjugation runs on an inflated window [-N-margin, N+margin] and is
    restricted back, so the unbounded generator's boundary rows never touch
    the result.  A margin-growth detector flags pollution; a conditioning
    guard refuses angle/window combinations whose exponential factors would
    drown the result in roundoff.
    """
    theta = complex(theta)
    if v.decay is None and v.kind != "lowrank":
        raise LatspecError("scaling a diagonal/dense perturbation requires a decay certificate")
    if v.decay is not None:
        probe_radius = min(0.1, v.decay.delta / 10.0)
        if abs(theta) > probe_radius + 1e-12:
            warnings.warn(
                f"|theta| = {abs(theta):.3f} beyond the certified probe radius {probe_radius:.3f}",
                stacklevel=2,
            )
    if margin is None:
        margin = _default_margin(v)

    def conjugate(marg):
        big = Window(window.half_width + marg)
        cond = _conjugation_condition(theta, big.dimension)
        if cond > CONJUGATION_TOL:
            raise OverflowGuardError(
                f"conjugation would lose accuracy to {cond:.1e} (> {CONJUGATION_TOL:.0e}); "
                "reduce theta or window"
            )
        a0 = build_a0(big)
        grow = mat_exp(1j * theta * a0)
        shrink = mat_exp(-1j * theta * a0)
        dense = v.dense_matrix(big)
        full = grow @ dense @ shrink
        sl = slice(marg, marg + window.dimension)
        return full[sl, sl]

    result = conjugate(margin)
    if check_margin:
        wider = conjugate(margin + 10)
        drift = float(np.max(np.abs(result - wider)))
        if drift > 1e-8:
            raise MarginError(f"restricted conjugation moved by {drift:.2e} when margin grew; increase margin")
    return result


@dataclass
class SpectrumClassification:
    """Eigenvalues of the scaled truncations split by curve distance and stability."""

    theta: complex
    discrete_candidates: list  # (z, curve_distance, window_stability)
    curve_attached: list
    curve: ScaledSpectrumCurve
    windows: tuple


def classify_spectrum(theta, v: Perturbation, windows: Sequence[Window],
                      tol_curve=1e-2, tol_stab=1e-6, margin=None):
    """Separate discrete-spectrum candidates from essential-curve artifacts.

    Eigensolves the scaled Hamiltonian on each window; an eigenvalue of the
    largest window is a discrete candidate iff it sits further than
    ``tol_curve`` from the essential curve and moves less than ``tol_stab``
    against the next window.  Everything else is curve-attached.
    """
    theta = complex(theta)
    if theta.imag == 0.0:
        raise LatspecError("classification needs Im(theta) != 0 to separate the curve")
    if len(windows) < 2:
        raise LatspecError("at least two windows are required for the stability check")
    ordered = sorted(windows, key=lambda w: w.half_width)
    curve = spectrum_curve(theta)
    spectra = []
    for w in ordered:
        h = scaled_h0_matrix(theta, w).astype(complex)
        h += scaled_perturbation(theta, v, w, margin=margin)
        spectra.append(np.linalg.eigvals(h))
    big, prev = spectra[-1], spectra[-2]
    candidates = []
    attached = []
    for z in big:
        dist = curve.distance(z)
        if dist <= tol_curve:
            attached.append(complex(z))
            continue
        move = float(np.min(np.abs(prev - z)))
        if move < tol_stab:
            if dist < 2.0 * tol_curve:
                warnings.warn(
                    f"candidate {z:.6g} sits within 2*tol_curve of the essential curve (ambiguous)",
                    stacklevel=2,
                )
            candidates.append((complex(z), dist, move))
        else:
            attached.append(complex(z))
    return SpectrumClassification(
        theta=theta,
        discrete_candidates=candidates,
        curve_attached=attached,
        curve=curve,
        windows=tuple(w.half_width for w in ordered),
    )


def analytic_vector_resolvent(theta, v: Optional[Perturbation], window: Window,
                              phi_index, psi_index, z_grid, margin=None):
    """Matrix elements of the scaled resolvent between deformed basis vectors.

    Evaluates <e_psi(conj theta), (H_V(theta) - z)^{-1} e_phi(theta)> with
    e(theta) = exp(i theta A0) e; for real theta this reproduces the plain
    matrix element, and for Im(theta) > 0 it continues it analytically
    across the spectral band from below.

    Returns a list of (z, value) pairs.
    """
    theta = complex(theta)
    h = scaled_h0_matrix(theta, window).astype(complex)
    if v is not None:
        h += scaled_perturbation(theta, v, window, margin=margin)
    eig = np.linalg.eigvals(h)

    marg = 40
    big = Window(window.half_width + marg)
    sl = slice(marg, marg + window.dimension)

    def deformed(index, th):
        e = np.zeros(big.dimension, dtype=complex)
        e[big.index_of(index)] = 1.0
        return apply_scaling_group(th, big, e)[sl]

    if abs(phi_index) > window.half_width or abs(psi_index) > window.half_width:
        raise LatspecError("deformed-vector indices must lie inside the window")
    phi = deformed(phi_index, theta)
    psi = deformed(psi_index, np.conj(theta))
    ident = np.eye(window.dimension, dtype=complex)
    out = []
    for z in z_grid:
        z = complex(z)
        if np.min(np.abs(eig - z)) < 1e-8:
            raise LatspecError(f"z = {z} within 1e-8 of a scaled eigenvalue")
        val = np.vdot(psi, np.linalg.solve(h - z * ident, phi))
        out.append((z, complex(val)))
    return out
