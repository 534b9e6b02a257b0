"""Resonance detection by argument-principle indices of the characteristic function.

The contour index (1/2 pi i) Tr of the closed integral of F^{-1} F' counts
characteristic values with multiplicity; the winding of det F provides an
independent integer that must agree.  The search subdivides the punctured
momentum disk (an annulus, since F carries an i/k pole at the threshold)
until every nonzero-index cluster is localized.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .errors import ContourError, LatspecError
from .lattice import Perturbation, Window, assemble_hv
from .numerics import Contour
from .resolvent import CharFnHandle, build_char_fn, weighted_r0_matrix, script_v_matrix, z_of_k

#: a contour node this close to singular aborts the quadrature
NODE_SINGULAR_TOL = 1e-10

#: accepted integer-rounding residual for contour indices
INDEX_RESIDUAL_TOL = 0.1

#: successive node-doubling estimates must agree to this before acceptance
INDEX_CONVERGENCE_TOL = 1e-3

MAX_DOUBLINGS = 4


def _trace_logderivative(handle: CharFnHandle, k):
    f = handle.f(k)
    fp = handle.f_prime(k)
    try:
        x = np.linalg.solve(f, fp)
    except np.linalg.LinAlgError as exc:
        raise ContourError(f"characteristic function singular at node k = {k}") from exc
    return complex(np.trace(x))


def contour_index(handle: CharFnHandle, contour: Contour):
    """Argument-principle index of F over a circle, with convergence certificate.

    Returns ``(raw, index, residual)``: the trapezoid value of the trace
    integral, its nearest integer, and their distance.  Nodes are doubled
    until two successive estimates agree to 1e-3 (values at already-visited
    angles are reused); a residual above 0.1 after the refinement cap
    raises :class:`ContourError`.
    """
    c = contour
    probe = np.exp(2j * np.pi * np.arange(16) / 16.0)
    sigma_min = min(handle.smallest_singular_value(c.center + c.radius * w) for w in probe)
    if sigma_min <= NODE_SINGULAR_TOL:
        raise ContourError(
            f"characteristic value on the contour: smallest singular value {sigma_min:.2e}"
        )
    cache = {}

    def value(frac):
        if frac not in cache:
            cache[frac] = _trace_logderivative(handle, c.center + c.radius * np.exp(2j * np.pi * frac))
        return cache[frac]

    n = c.node_count
    prev = None
    raw = None
    for _ in range(MAX_DOUBLINGS + 1):
        total = 0.0 + 0.0j
        for j in range(n):
            frac = j / n
            total += value(frac) * np.exp(2j * np.pi * frac)
        raw = complex(total * c.radius / n)
        if prev is not None and abs(raw - prev) < INDEX_CONVERGENCE_TOL:
            break
        prev = raw
        n *= 2
    index = int(np.rint(raw.real))
    residual = abs(raw - index)
    if residual >= INDEX_RESIDUAL_TOL:
        raise ContourError(f"index did not settle on an integer: raw = {raw}, residual = {residual:.3f}")
    return raw, index, residual


def _phase_winding(values):
    args = np.angle(np.asarray(values))
    d = np.diff(args)
    d = (d + np.pi) % (2.0 * np.pi) - np.pi
    return d, float(np.sum(d) / (2.0 * np.pi))


def logdet_winding(handle: CharFnHandle, contour: Contour):
    """Winding number of det F(k) around zero along the contour.

    Computed by accumulating unwrapped phases of the determinant at the
    nodes; any phase jump above pi triggers node doubling.  Agrees with
    :func:`contour_index` on every accepted run.
    """
    c = contour
    cache = {}

    def det_sign(frac):
        if frac not in cache:
            sign, _ = np.linalg.slogdet(handle.f(c.center + c.radius * np.exp(2j * np.pi * frac)))
            if sign == 0:
                raise ContourError(f"determinant vanished at contour angle {frac}")
            cache[frac] = complex(sign)
        return cache[frac]

    n = c.node_count
    for _ in range(MAX_DOUBLINGS + 1):
        dets = [det_sign((j % n) / n) for j in range(n + 1)]
        jumps, winding = _phase_winding(dets)
        if np.max(np.abs(jumps)) <= np.pi / 2.0:
            return int(np.rint(winding))
        n *= 2
    raise ContourError("determinant phase kept jumping after maximal node doubling")


# ---------------------------------------------------------------------------
# adaptive search over the punctured disk
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _PolarRect:
    r1: float
    r2: float
    a1: float
    a2: float

    @property
    def diameter(self):
        return float(np.hypot(self.r2 - self.r1, self.r2 * (self.a2 - self.a1)))

    @property
    def center(self):
        return 0.5 * (self.r1 + self.r2) * np.exp(0.5j * (self.a1 + self.a2))

    def children(self, radial_frac=0.5, angular_frac=0.5):
        rm = np.exp(np.log(self.r1) + radial_frac * (np.log(self.r2) - np.log(self.r1)))
        am = self.a1 + angular_frac * (self.a2 - self.a1)
        return [
            _PolarRect(self.r1, rm, self.a1, am),
            _PolarRect(self.r1, rm, am, self.a2),
            _PolarRect(rm, self.r2, self.a1, am),
            _PolarRect(rm, self.r2, am, self.a2),
        ]


def _segment_points(rect: _PolarRect, per_side):
    """Closed boundary polyline of a polar rectangle, positively oriented."""
    t = np.linspace(0.0, 1.0, per_side, endpoint=False)
    right = (rect.r1 + t * (rect.r2 - rect.r1)) * np.exp(1j * rect.a1)
    outer = rect.r2 * np.exp(1j * (rect.a1 + t * (rect.a2 - rect.a1)))
    left = (rect.r2 + t * (rect.r1 - rect.r2)) * np.exp(1j * rect.a2)
    inner = rect.r1 * np.exp(1j * (rect.a2 + t * (rect.a1 - rect.a2)))
    pts = np.concatenate([right, outer, left, inner])
    return np.append(pts, pts[0])


def _winding_on_path(handle: CharFnHandle, points, max_refine=12):
    """Winding of det F along a closed polyline, refining until phase steps < pi/2."""
    pts = list(points)
    dets = [complex(np.linalg.slogdet(handle.f(k))[0]) for k in pts]
    for _ in range(max_refine):
        args = np.angle(np.asarray(dets))
        d = (np.diff(args) + np.pi) % (2.0 * np.pi) - np.pi
        bad = np.where(np.abs(d) > np.pi / 2.0)[0]
        if bad.size == 0:
            total = float(np.sum(d) / (2.0 * np.pi))
            idx = int(np.rint(total))
            if abs(total - idx) > INDEX_RESIDUAL_TOL:
                raise ContourError(f"path winding not integral: {total}")
            return idx
        insert_at = []
        for j in bad:
            insert_at.append(j)
        for j in reversed(insert_at):
            mid = 0.5 * (pts[j] + pts[j + 1])
            sign, _ = np.linalg.slogdet(handle.f(mid))
            if sign == 0:
                raise ContourError(f"determinant vanished on a region boundary at k = {mid}")
            pts.insert(j + 1, mid)
            dets.insert(j + 1, complex(sign))
    raise ContourError("region-boundary winding did not stabilize under refinement")


def _region_index(handle, rect: _PolarRect, per_side=24):
    return _winding_on_path(handle, _segment_points(rect, per_side))


@dataclass(frozen=True)
class ResonanceFinding:
    """One localized resonance with its contour-certified multiplicity."""

    k: complex
    z: complex
    multiplicity: int
    sheet: str  # "physical" (Im k >= 0) | "nonphysical"
    threshold: int

    def to_json(self):
        return {
            "k": [self.k.real, self.k.imag],
            "z": [self.z.real, self.z.imag],
            "multiplicity": self.multiplicity,
            "sheet": self.sheet,
            "threshold": self.threshold,
        }


@dataclass
class ResonanceSearchResult:
    """Findings plus the separately reported threshold-pole index contributions."""

    findings: List[ResonanceFinding]
    inner_index: int
    outer_index: int
    annulus_count: int


def resonance_search(v: Perturbation, delta, window: Window, threshold,
                     disk_radius=None, max_depth=40, target_diameter=1e-6) -> ResonanceSearchResult:
    """Locate all characteristic values in the punctured momentum disk.

    The punctured disk is handled as an annulus with inner radius
    1e-4 * disk_radius, since the characteristic function carries an i/k
    pole at the threshold itself; the inner circle's index is reported
    separately rather than folded into the findings.  Regions of nonzero
    index are quartered (geometric radial splits) until their diameter
    drops below ``target_diameter``; every split is checked for index
    additivity and jittered off characteristic values sitting on a cut.
    """
    handle = build_char_fn(v, delta, window, threshold=threshold)
    radius = handle.eps0 / 2.0 if disk_radius is None else float(disk_radius)
    if radius > handle.eps0:
        raise LatspecError(f"disk_radius {radius} exceeds the handle's eps0 {handle.eps0}")
    r_in = 1e-4 * radius

    outer = logdet_winding(handle, Contour(0.0, radius, 512))
    inner = logdet_winding(handle, Contour(0.0, r_in, 256))
    total = outer - inner
    result = ResonanceSearchResult([], inner_index=inner, outer_index=outer, annulus_count=total)
    if total == 0:
        return result

    clusters = []

    def subdivide(rect: _PolarRect, index, depth):
        if index == 0:
            return
        if rect.diameter < target_diameter:
            clusters.append((rect, index))
            return
        if depth >= max_depth:
            raise ContourError(f"max subdivision depth reached at region {rect}")
        for jitter in (0.5, 0.53, 0.47, 0.563):
            try:
                kids = rect.children(radial_frac=jitter, angular_frac=jitter)
                counts = [_region_index(handle, child) for child in kids]
                break
            except ContourError:
                continue
        else:
            raise ContourError(f"could not split region {rect} off the characteristic values")
        if sum(counts) != index:
            raise ContourError(
                f"index additivity violated at {rect}: parent {index}, children {counts}"
            )
        for child, cnt in zip(kids, counts):
            subdivide(child, cnt, depth + 1)

    root = _PolarRect(r_in, radius, 0.0, 2.0 * np.pi)
    subdivide(root, total, 0)

    centers = [rect.center for rect, _ in clusters]
    for (rect, count), k_c in zip(clusters, centers):
        others = [abs(k_c - o) for o in centers if o is not k_c and abs(o - k_c) > target_diameter]
        sep = min(others) if others else radius
        iso = min(max(4.0 * rect.diameter, 1e-5), 0.4 * sep, 0.5 * abs(k_c), handle.eps0 - abs(k_c))
        contour = Contour(complex(k_c), iso, 128)
        raw, idx, residual = contour_index(handle, contour)
        wind = logdet_winding(handle, contour)
        if idx != wind:
            raise ContourError(f"trace index {idx} disagrees with determinant winding {wind}")
        result.findings.append(
            ResonanceFinding(
                k=complex(k_c),
                z=z_of_k(k_c, threshold),
                multiplicity=idx,
                sheet="physical" if k_c.imag >= 0 else "nonphysical",
                threshold=threshold,
            )
        )
    result.findings.sort(key=lambda f: (abs(f.k), f.k.real, f.k.imag))
    return result


@dataclass(frozen=True)
class CrossCheckReport:
    z0: complex
    eigenvalue_of_hv: bool
    minus_one_eigenvalue_of_t: bool
    hv_distance: float
    t_distance: float

    @property
    def agree(self):
        return self.eigenvalue_of_hv == self.minus_one_eigenvalue_of_t


def eigenvalue_cross_check(v: Perturbation, delta, window: Window, z0, tol=1e-7) -> CrossCheckReport:
    """Check the equivalence: z0 in spec(H_V)  <=>  -1 in spec(T_V(z0)).

    ``z0`` must sit off the band (physical sheet, z0 = k^2 with Im k >= 0).
    Both sides are evaluated on the same window with tolerance ``tol``.
    """
    z0 = complex(z0)
    if 0.0 <= z0.real <= 4.0 and z0.imag == 0.0:
        raise LatspecError("z0 must lie off the spectral band [0, 4]")
    k = np.sqrt(complex(z0))
    if k.imag < 0:
        k = -k
    hv = assemble_hv(window, v)
    ev_h = np.linalg.eigvals(hv)
    d_h = float(np.min(np.abs(ev_h - z0)))
    t = script_v_matrix(v, delta, window) @ weighted_r0_matrix(k, delta, window)
    ev_t = np.linalg.eigvals(t)
    d_t = float(np.min(np.abs(ev_t + 1.0)))
    return CrossCheckReport(
        z0=z0,
        eigenvalue_of_hv=d_h < tol,
        minus_one_eigenvalue_of_t=d_t < tol,
        hv_distance=d_h,
        t_distance=d_t,
    )
