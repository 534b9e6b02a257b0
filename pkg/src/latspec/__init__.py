"""latspec: spectral analysis of perturbed discrete Laplacians on finite windows."""

from .errors import (
    BranchProximityWarning,
    ConfigError,
    ContourError,
    CutProximityError,
    EigenConvergenceError,
    LatspecError,
    MarginError,
    OverflowGuardError,
)
from .lattice import (
    DecayCertificate,
    Perturbation,
    Window,
    apply_j_conjugation,
    assemble_hv,
    build_a0,
    build_h0,
    build_weight,
    numerical_range_bounds,
)
from .numerics import Contour, arcsin_principal, contour_quadrature, eig_dense, mat_exp, principal_sqrt
from .symbols import ScaledSpectrumCurve, homography_f, scaled_symbol, spectrum_curve, symbol_f

__version__ = "0.1.0"

__all__ = [
    "BranchProximityWarning",
    "ConfigError",
    "Contour",
    "ContourError",
    "CutProximityError",
    "DecayCertificate",
    "EigenConvergenceError",
    "LatspecError",
    "MarginError",
    "OverflowGuardError",
    "Perturbation",
    "ScaledSpectrumCurve",
    "Window",
    "apply_j_conjugation",
    "arcsin_principal",
    "assemble_hv",
    "build_a0",
    "build_h0",
    "build_weight",
    "contour_quadrature",
    "eig_dense",
    "homography_f",
    "mat_exp",
    "numerical_range_bounds",
    "principal_sqrt",
    "scaled_symbol",
    "spectrum_curve",
    "symbol_f",
]
