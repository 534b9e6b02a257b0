"""Numerical membership checks for the regularity classes of perturbations.

Exponential-decay certificates, the difference seminorms controlling
commutator smoothness, integral criteria capturing fractional regularity,
and growth bounds for iterated applications of the conjugate operator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import LatspecError
from .lattice import DecayCertificate, Perturbation, Window, build_a0

#: decay fits cap the rate here when the data is compactly supported
DELTA_CAP = 20.0

#: entries below this magnitude are treated as zero by the decay fit
FIT_FLOOR = 1e-14

#: maximal admissible positive misfit (log domain) for a decay fit to pass
FIT_SLACK = 1e-10


def seminorms_q(v):
    """Difference seminorms (q0, q1, q2) of a sequence on the window.

    q0 = sup |v(n)|, q1 = sup |n (v(n+1) - v(n))|,
    q2 = sup |n^2 (v(n+2) - 2 v(n+1) + v(n))|, sups over the window sites
    where the differences are defined.  Positively homogeneous of degree 1.
    """
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1 or len(v) % 2 == 0:
        raise LatspecError("seminorms expect an odd-length centered sequence")
    half = (len(v) - 1) // 2
    n = np.arange(-half, half + 1)
    q0 = float(np.max(np.abs(v))) if v.size else 0.0
    d1 = v[1:] - v[:-1]
    q1 = float(np.max(np.abs(n[:-1] * d1))) if d1.size else 0.0
    d2 = v[2:] - 2.0 * v[1:-1] + v[:-2]
    q2 = float(np.max(np.abs(n[:-2] ** 2 * d2))) if d2.size else 0.0
    return q0, q1, q2


@dataclass(frozen=True)
class DecayFit:
    """Outcome of fitting |V(n,m)| <= C exp(-delta(|n|+|m|))."""

    passed: bool
    c: float
    delta: float
    residual: float
    capped: bool = False
    degenerate: bool = False

    def certificate(self) -> Optional[DecayCertificate]:
        if not self.passed or self.degenerate:
            return None
        return DecayCertificate(self.c, self.delta)


def decay_certificate(v: Perturbation) -> DecayFit:
    """Least-squares exponential-decay fit of the perturbation entries.

    Fits log|V(n,m)| against log C - delta (|n|+|m|) over entries above the
    floor; passes iff the fitted rate is positive and no sampled entry
    exceeds the fitted bound by more than the slack.  Compact support caps
    the rate at DELTA_CAP; an all-zero perturbation returns the degenerate
    certificate C = 0.
    """
    if v.kind == "lowrank":
        mat = None
        half = max(max((len(l) - 1) // 2, (len(r) - 1) // 2) for _, l, r in v.terms)
        mat = v.dense_matrix(Window(max(half, 1)))
    elif v.kind == "diagonal":
        half = (len(v.values) - 1) // 2
        mat = v.dense_matrix(Window(max(half, 1)))
    else:
        half = (v.entries.shape[0] - 1) // 2
        mat = v.entries
    half = (mat.shape[0] - 1) // 2
    n = np.arange(-half, half + 1)
    radial = np.abs(n)[:, None] + np.abs(n)[None, :]
    mags = np.abs(mat)
    mask = mags > FIT_FLOOR
    if not np.any(mask):
        return DecayFit(passed=True, c=0.0, delta=DELTA_CAP, residual=0.0, degenerate=True)
    s = radial[mask].astype(float)
    y = np.log(mags[mask])
    if np.unique(s).size < 2:
        c = float(np.exp(y.max()))
        return DecayFit(passed=True, c=c, delta=DELTA_CAP, residual=0.0, capped=True)
    slope, intercept = np.polyfit(s, y, 1)
    delta = -float(slope)
    if delta <= 0.0:
        return DecayFit(passed=False, c=float(np.exp(intercept)), delta=delta,
                        residual=float(np.max(y - (intercept + slope * s))))
    misfit = y - (intercept + slope * s)
    residual = float(np.max(np.abs(misfit)))
    overshoot = float(np.max(misfit))
    capped = False
    if delta > DELTA_CAP:
        delta = DELTA_CAP
        capped = True
    return DecayFit(
        passed=overshoot <= FIT_SLACK,
        c=float(np.exp(intercept)),
        delta=delta,
        residual=residual,
        capped=capped,
    )


@dataclass(frozen=True)
class ClassVerdict:
    """Truncated-integral membership verdict for one decay class."""

    class_name: str
    a: float
    b: float
    verdict: str  # "pass" | "fail" | "inconclusive"
    integral: float
    tail: float
    r_max: float


def _class_integrand(v, cls, a, b, half):
    v = np.asarray(v, dtype=complex)
    n = np.arange(-half, half + 1)

    if cls == "S":
        data = np.abs(v)
        pos = np.abs(n)
    elif cls == "M":
        data = np.abs(v[1:] - v[:-1])
        pos = np.abs(n[:-1])
    elif cls == "D":
        data = np.abs(v)
        pos = n  # positive block sums only, per the class definition
    else:
        raise LatspecError(f"unknown class '{cls}'")

    def g(r):
        lo, hi = a * r, b * r
        if cls == "D":
            sel = (pos >= lo) & (pos <= hi) & (pos >= 1)
            block = data[sel]
            return float(np.sqrt(np.sum(block**2))) if block.size else 0.0
        sel = (pos >= lo) & (pos <= hi)
        return float(np.max(data[sel])) if np.any(sel) else 0.0

    return g


def class_membership(v, class_name, a, b, threshold=50.0,
                     certificate: Optional[DecayCertificate] = None) -> ClassVerdict:
    """Truncated integral criterion for the decay classes S, M and D.

    Integrates over r in [1, N/b] the windowed statistic of the sequence
    (class S: sup |v(n)|; M: sup of first differences; D: positive-side
    l2 block norms), adds an analytic tail bound when a decay certificate
    is available, and declares:

    * fail -- the integrand has not decayed by the cutoff (divergence),
      or the total exceeds the threshold,
    * pass -- total below threshold and the tail below 10% of the
      truncated integral,
    * inconclusive -- otherwise (tail not demonstrably negligible).
    """
    if not 0 < a < b:
        raise LatspecError("need 0 < a < b")
    v = np.asarray(v, dtype=complex)
    half = (len(v) - 1) // 2
    r_max = half / b
    if r_max < 2.0:
        raise LatspecError(f"window too small for the r-range: N/b = {r_max:.2f} < 2")
    g = _class_integrand(v, class_name, a, b, half)
    grid = np.linspace(1.0, r_max, max(int(40 * (r_max - 1)), 200))
    vals = np.array([g(r) for r in grid])
    integral = float(np.trapezoid(vals, grid))
    g_end = float(vals[-1])
    if certificate is not None:
        c0, rate = certificate.c, certificate.delta
        if class_name == "M":
            c0 = c0 * (1.0 + np.exp(rate))
        if class_name == "D":
            c0 = c0 / max(np.sqrt(1.0 - np.exp(-2.0 * rate)), 1e-9)
        tail = float(c0 * np.exp(-rate * a * r_max) / (rate * a))
    else:
        # crude proxy: a decaying-at-least-like-1/r^2 integrand has tail <= g*r
        tail = g_end * r_max
    total = integral + tail
    diverging = g_end * r_max > 0.25 * max(integral, 1e-300)
    if diverging and g_end > 1e-12:
        return ClassVerdict(class_name, a, b, "fail", integral, tail, r_max)
    if total > threshold:
        return ClassVerdict(class_name, a, b, "fail", integral, tail, r_max)
    if tail <= 0.1 * max(integral, 1e-300) or tail < 1e-12:
        return ClassVerdict(class_name, a, b, "pass", integral, tail, r_max)
    return ClassVerdict(class_name, a, b, "inconclusive", integral, tail, r_max)


def analytic_vector_growth(n, k_max, window: Window):
    """Norm growth of iterated conjugate-operator applications to one basis vector.

    Returns [(k, |A0^k e_n|, bound)] for k = 0..k_max, where the bound is
    2^k (|n|+k-1)!/(|n|-1)! (with |n| = 0 treated as 1, where the bound is
    weakest).  The window must leave the iterates room: N >= |n| + k_max + 2.
    """
    n = int(n)
    if window.half_width < abs(n) + k_max + 2:
        raise LatspecError(
            f"window N = {window.half_width} too small; need >= |n| + k_max + 2 = {abs(n) + k_max + 2}"
        )
    a0 = build_a0(window)
    vec = np.zeros(window.dimension, dtype=complex)
    vec[window.index_of(n)] = 1.0
    base = max(abs(n), 1)
    out = []
    bound = 1.0
    for k in range(0, k_max + 1):
        if k > 0:
            vec = a0 @ vec
            bound *= 2.0 * (base + k - 1)
        edge = max(abs(vec[0]), abs(vec[-1]))
        if edge > 1e-12 * max(np.linalg.norm(vec), 1e-300):
            raise LatspecError("iterates polluted by the window boundary; widen the window")
        out.append((k, float(np.linalg.norm(vec)), float(bound)))
    return out


@dataclass
class RegularityReport:
    """Bundle of regularity diagnostics for one perturbation."""

    q0: Optional[float] = None
    q1: Optional[float] = None
    q2: Optional[float] = None
    decay_fit: Optional[DecayFit] = None
    class_flags: dict = field(default_factory=dict)

    def to_json(self):
        doc = {}
        if self.q0 is not None:
            doc["seminorms"] = {"q0": self.q0, "q1": self.q1, "q2": self.q2}
        if self.decay_fit is not None:
            f = self.decay_fit
            doc["decay_fit"] = {
                "passed": f.passed,
                "C": f.c,
                "delta": f.delta,
                "residual": f.residual,
                "capped": f.capped,
                "degenerate": f.degenerate,
            }
        if self.class_flags:
            doc["classes"] = {
                name: {
                    "verdict": cv.verdict,
                    "integral": cv.integral,
                    "tail": cv.tail,
                    "r_max": cv.r_max,
                    "a": cv.a,
                    "b": cv.b,
                }
                for name, cv in self.class_flags.items()
            }
        return doc
