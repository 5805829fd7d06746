"""Pseudospectral b-family solver with analyticity-strip singularity tracking."""

from .core import (
    TYPE_I,
    TYPE_II,
    GridSpec,
    PeriodicField,
    Spectrum,
    forward_transform,
    initial_datum,
    inverse_transform,
    make_grid,
)
from .integrator import BFamilyConfig, StopPolicy, StopReason, Trajectory, simulate
from .norms import GevreyParams, gevrey_norm, radius_lower_bound, sobolev_norm
from .precision import DOUBLE, EXTENDED32, Precision
from .spectral import RhsOptions, dealias_cutoff, derivative, helmholtz_inverse_dx, rhs
from .synthetic import SyntheticSpec, oracle_coefficients, oracle_field, oracle_spectrum
from .tracker import (
    FitOptions,
    FitResult,
    SingularityTrace,
    TrackOptions,
    fit_spectrum,
    late_time_alpha,
    local_fit,
    sliding_fit,
    strip_monitor,
    track,
    wynn_epsilon,
)

__version__ = "0.1.0"

__all__ = [
    "BFamilyConfig",
    "DOUBLE",
    "EXTENDED32",
    "FitOptions",
    "FitResult",
    "GevreyParams",
    "GridSpec",
    "PeriodicField",
    "Precision",
    "RhsOptions",
    "SingularityTrace",
    "Spectrum",
    "StopPolicy",
    "StopReason",
    "SyntheticSpec",
    "TYPE_I",
    "TYPE_II",
    "TrackOptions",
    "Trajectory",
    "dealias_cutoff",
    "derivative",
    "fit_spectrum",
    "forward_transform",
    "gevrey_norm",
    "helmholtz_inverse_dx",
    "initial_datum",
    "inverse_transform",
    "late_time_alpha",
    "local_fit",
    "make_grid",
    "oracle_coefficients",
    "oracle_field",
    "oracle_spectrum",
    "radius_lower_bound",
    "rhs",
    "simulate",
    "sliding_fit",
    "sobolev_norm",
    "strip_monitor",
    "track",
    "wynn_epsilon",
    "__version__",
]
