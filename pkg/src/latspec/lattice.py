"""Truncated lattice operators on the window [-N, N].

Builders for the discrete Laplacian, its conjugate operator, exponential
weights, the parity conjugation and assembled perturbed Hamiltonians.  All
matrices index sites row-major from -N to N.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, OverflowGuardError

#: discarded low-rank vector mass above this fraction triggers a warning
LOWRANK_MASS_TOL = 1e-10


@dataclass(frozen=True)
class Window:
    """Finite lattice truncation over sites -N..N."""

    half_width: int

    def __post_init__(self):
        if self.half_width < 1:
            raise ValueError("window half-width must be >= 1")

    @property
    def dimension(self):
        return 2 * self.half_width + 1

    def sites(self):
        n = self.half_width
        return np.arange(-n, n + 1)

    def index_of(self, site):
        return site + self.half_width


@dataclass(frozen=True)
class DecayCertificate:
    """Entrywise bound |V(n,m)| <= C exp(-delta(|n|+|m|))."""

    c: float
    delta: float

    def __post_init__(self):
        if self.c < 0 or self.delta <= 0:
            raise ValueError("certificate needs C >= 0 and delta > 0")


def _to_complex_array(values, name):
    try:
        arr = np.asarray(values, dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"cannot parse '{name}' as complex data", key=name) from exc
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"'{name}' contains non-finite entries", key=name)
    return arr


def _pairs_to_complex(obj, name):
    """Parse the [re, im] pair encoding used by the JSON interchange format."""
    arr = np.asarray(obj, dtype=float)
    if arr.shape[-1] != 2:
        raise ConfigError(f"'{name}' must use [re, im] pairs", key=name)
    return arr[..., 0] + 1j * arr[..., 1]


def _complex_to_pairs(arr):
    arr = np.asarray(arr, dtype=complex)
    out = np.empty(arr.shape + (2,), dtype=float)
    out[..., 0] = arr.real
    out[..., 1] = arr.imag
    return out.tolist()


@dataclass(frozen=True)
class Perturbation:
    """Compact perturbation of the free Hamiltonian.

    Three storage variants share one interface:

    * ``diagonal`` -- 1-d array of on-site values, centered at site 0,
    * ``dense``    -- square array of entries by site pair, centered,
    * ``lowrank``  -- list of (coefficient, left, right) triples meaning
      ``sum_j  c_j |left_j><right_j|`` with centered vectors.

    ``decay`` optionally certifies |V(n,m)| <= C exp(-delta(|n|+|m|)).
    """

    kind: str
    values: Optional[np.ndarray] = None
    entries: Optional[np.ndarray] = None
    terms: Optional[tuple] = None
    decay: Optional[DecayCertificate] = None

    def __post_init__(self):
        if self.kind not in ("diagonal", "dense", "lowrank"):
            raise ConfigError(f"unknown perturbation kind '{self.kind}'", key="kind")
        if self.kind == "diagonal":
            if self.values is None or np.asarray(self.values).ndim != 1 or len(self.values) % 2 == 0:
                raise ConfigError("diagonal variant needs an odd-length centered 'values' array", key="values")
        elif self.kind == "dense":
            e = self.entries
            if e is None or np.asarray(e).ndim != 2 or e.shape[0] != e.shape[1] or e.shape[0] % 2 == 0:
                raise ConfigError("dense variant needs an odd square centered 'entries' array", key="entries")
        else:
            if not self.terms:
                raise ConfigError("lowrank variant needs a nonempty 'terms' list", key="terms")
            for c, left, right in self.terms:
                if len(left) % 2 == 0 or len(right) % 2 == 0:
                    raise ConfigError("lowrank vectors must be odd-length and centered", key="terms")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def diagonal(values, decay=None):
        return Perturbation("diagonal", values=_to_complex_array(values, "values"), decay=decay)

    @staticmethod
    def dense(entries, decay=None):
        return Perturbation("dense", entries=_to_complex_array(entries, "entries"), decay=decay)

    @staticmethod
    def lowrank(terms, decay=None):
        parsed = tuple(
            (complex(c), _to_complex_array(left, "terms"), _to_complex_array(right, "terms"))
            for c, left, right in terms
        )
        return Perturbation("lowrank", terms=parsed, decay=decay)

    @staticmethod
    def rank_one_site(site, coefficient=1.0, decay=None):
        """c |e_site><e_site| as a lowrank perturbation."""
        size = 2 * abs(site) + 1
        v = np.zeros(size, dtype=complex)
        v[site + abs(site)] = 1.0
        return Perturbation.lowrank([(coefficient, v, v)], decay=decay)

    # -- JSON interchange ---------------------------------------------------

    @staticmethod
    def from_json(doc):
        """Parse the interchange document {kind, values|entries|terms, decay}."""
        if not isinstance(doc, dict):
            raise ConfigError("perturbation document must be an object", key="perturbation")
        kind = doc.get("kind")
        decay = None
        if doc.get("decay") is not None:
            d = doc["decay"]
            try:
                decay = DecayCertificate(float(d["C"]), float(d["delta"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError("decay certificate needs numeric 'C' and 'delta'", key="decay") from exc
        if kind == "diagonal":
            if "values" not in doc:
                raise ConfigError("diagonal perturbation requires 'values'", key="values")
            return Perturbation("diagonal", values=_pairs_to_complex(doc["values"], "values"), decay=decay)
        if kind == "dense":
            if "entries" not in doc:
                raise ConfigError("dense perturbation requires 'entries'", key="entries")
            return Perturbation("dense", entries=_pairs_to_complex(doc["entries"], "entries"), decay=decay)
        if kind == "lowrank":
            if "terms" not in doc:
                raise ConfigError("lowrank perturbation requires 'terms'", key="terms")
            terms = []
            for t in doc["terms"]:
                try:
                    coeff = complex(t["coefficient"][0], t["coefficient"][1])
                    terms.append((coeff, _pairs_to_complex(t["left"], "terms"), _pairs_to_complex(t["right"], "terms")))
                except (KeyError, TypeError, IndexError) as exc:
                    raise ConfigError("lowrank term needs 'coefficient', 'left', 'right'", key="terms") from exc
            return Perturbation("lowrank", terms=tuple(terms), decay=decay)
        raise ConfigError(f"unknown perturbation kind '{kind}'", key="kind")

    def to_json(self):
        doc = {"kind": self.kind}
        if self.kind == "diagonal":
            doc["values"] = _complex_to_pairs(self.values)
        elif self.kind == "dense":
            doc["entries"] = _complex_to_pairs(self.entries)
        else:
            doc["terms"] = [
                {
                    "coefficient": [c.real, c.imag],
                    "left": _complex_to_pairs(left),
                    "right": _complex_to_pairs(right),
                }
                for c, left, right in self.terms
            ]
        if self.decay is not None:
            doc["decay"] = {"C": self.decay.c, "delta": self.decay.delta}
        return doc

    # -- realization --------------------------------------------------------

    def _fit_centered_vector(self, vec, window):
        """Pad or truncate a centered vector to the window, warning on lost mass."""
        out = np.zeros(window.dimension, dtype=complex)
        half = (len(vec) - 1) // 2
        n = window.half_width
        lo = max(-half, -n)
        hi = min(half, n)
        out[lo + n : hi + n + 1] = vec[lo + half : hi + half + 1]
        total = np.linalg.norm(vec)
        if total > 0:
            lost = np.sqrt(max(np.linalg.norm(vec) ** 2 - np.linalg.norm(out) ** 2, 0.0))
            if lost > LOWRANK_MASS_TOL * total:
                warnings.warn(
                    f"perturbation vector loses {lost / total:.2e} of its norm outside the window",
                    stacklevel=3,
                )
        return out

    def dense_matrix(self, window):
        """Dense realization of the perturbation on the window."""
        d = window.dimension
        n = window.half_width
        if self.kind == "diagonal":
            out = np.zeros((d, d), dtype=complex)
            half = (len(self.values) - 1) // 2
            lo, hi = max(-half, -n), min(half, n)
            for site in range(lo, hi + 1):
                out[site + n, site + n] = self.values[site + half]
            return out
        if self.kind == "dense":
            e = self.entries
            half = (e.shape[0] - 1) // 2
            out = np.zeros((d, d), dtype=complex)
            lo, hi = max(-half, -n), min(half, n)
            sl_w = slice(lo + n, hi + n + 1)
            sl_e = slice(lo + half, hi + half + 1)
            out[sl_w, sl_w] = e[sl_e, sl_e]
            return out
        out = np.zeros((d, d), dtype=complex)
        for c, left, right in self.terms:
            lv = self._fit_centered_vector(left, window)
            rv = self._fit_centered_vector(right, window)
            out += c * np.outer(lv, rv.conj())
        return out

    def scaled(self, factor):
        """Perturbation multiplied by a scalar; the decay certificate rescales with it."""
        decay = None
        if self.decay is not None:
            decay = DecayCertificate(self.decay.c * abs(factor), self.decay.delta)
        if self.kind == "diagonal":
            return Perturbation("diagonal", values=self.values * factor, decay=decay)
        if self.kind == "dense":
            return Perturbation("dense", entries=self.entries * factor, decay=decay)
        terms = tuple((c * factor, l, r) for c, l, r in self.terms)
        return Perturbation("lowrank", terms=terms, decay=decay)


def build_h0(window):
    """Free Hamiltonian: symmetric tridiagonal with 2 on and -1 off the diagonal.

    Dirichlet truncation: the matrix is simply restricted to the window.
    """
    d = window.dimension
    h = np.zeros((d, d))
    np.fill_diagonal(h, 2.0)
    idx = np.arange(d - 1)
    h[idx, idx + 1] = -1.0
    h[idx + 1, idx] = -1.0
    return h


def build_a0(window):
    """Conjugate operator of the free Hamiltonian, truncated to the window.

    Position-space convention (interior rows)::

        A0 e_n = i (n - 1/2) e_{n-1} - i (n + 1/2) e_{n+1}

    The sign is pinned by the exact identity i[A0, H0] = 4 H0 - H0^2, which
    the commutator tests check entrywise on interior rows.
    """
    n0 = window.half_width
    d = window.dimension
    a = np.zeros((d, d), dtype=complex)
    for site in range(-n0, n0 + 1):
        col = site + n0
        if site - 1 >= -n0:
            a[col - 1, col] = 1j * (site - 0.5)
        if site + 1 <= n0:
            a[col + 1, col] = -1j * (site + 0.5)
    return a


def build_weight(window, delta, sign):
    """Diagonal exponential weight exp(sign * (delta/2) |n|).

    ``build_weight(w, d, +1) @ build_weight(w, d, -1)`` is the identity
    exactly.  Rates with delta*N beyond the double-precision exponent range
    are refused.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    if delta * window.half_width > 1400.0:
        raise OverflowGuardError(
            f"delta*N = {delta * window.half_width:.1f} > 1400 overflows the weight; shrink window or delta"
        )
    grow = np.exp((delta / 2.0) * np.abs(window.sites()))
    # the -1 weight is the elementwise reciprocal so the pair inverts to a ulp
    return np.diag(grow if sign == +1 else 1.0 / grow)


def apply_j_conjugation(v: Perturbation) -> Perturbation:
    """Parity conjugation V -> J V J^{-1}, i.e. entries times (-1)^(n+m).

    Diagonal variants are returned unchanged; the decay certificate carries
    over since moduli are preserved.
    """
    if v.kind == "diagonal":
        return v
    if v.kind == "dense":
        half = (v.entries.shape[0] - 1) // 2
        s = (-1.0) ** np.abs(np.arange(-half, half + 1))
        return Perturbation("dense", entries=v.entries * np.outer(s, s), decay=v.decay)
    terms = []
    for c, left, right in v.terms:
        hl = (len(left) - 1) // 2
        hr = (len(right) - 1) // 2
        sl = (-1.0) ** np.abs(np.arange(-hl, hl + 1))
        sr = (-1.0) ** np.abs(np.arange(-hr, hr + 1))
        terms.append((c, left * sl, right * sr))
    return Perturbation("lowrank", terms=tuple(terms), decay=v.decay)


def assemble_hv(window, v: Perturbation):
    """Perturbed Hamiltonian H0 + V realized on the window."""
    return build_h0(window).astype(complex) + v.dense_matrix(window)


def numerical_range_bounds(h):
    """Extremal eigenvalues (sigma_minus, sigma_plus) of the skew part Im(H)."""
    h = np.asarray(h)
    im = (h - h.conj().T) / 2j
    lam = np.linalg.eigvalsh(im)
    return float(lam[0]), float(lam[-1])
