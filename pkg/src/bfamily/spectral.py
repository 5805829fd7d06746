"""Spectral operators and the b-family right-hand side.

The b-family on the periodic domain, written for the velocity field,

    u_t + u u_x = -(1 - d_xx)^{-1} d_x [ (b/2) u^2 + ((3-b)/2) u_x^2 ],

turns into one ODE per Fourier mode:

    d/dt u_hat[k] = -( (u u_x)_hat[k]
                       + (i k / (1 + k^2)) * ( (b/2) (u^2)_hat[k]
                                               + ((3-b)/2) (u_x^2)_hat[k] ) ).

Products are evaluated pointwise on the grid (pseudospectral).  The
unpaired Nyquist mode is annihilated by odd-symbol multipliers and
zeroed after every nonlinear evaluation; the k = 0 component of the
right-hand side vanishes identically (the advective product has zero
discrete mean and the multiplier vanishes at k = 0), so it is forced to
exact zero and the mean is conserved to the last bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .core import PeriodicField, Spectrum, forward_transform, inverse_transform
from .errors import BlowUpOverflowError
from .precision import all_finite, is_extended_array, working_context


@dataclass(frozen=True)
class RhsOptions:
    """Equation family parameter and evaluation switches.

    b selects the member of the family (2: Camassa-Holm, 3:
    Degasperis-Procesi).  With ``dealias`` the upper third of modes is
    zeroed before and after products (two-thirds rule); the default
    keeps the full spectrum.
    """

    b: float
    dealias: bool = False

    def __post_init__(self) -> None:
        if not np.isfinite(self.b):
            raise ValueError("b must be finite")


def dealias_cutoff(n_modes: int) -> int:
    """Largest retained |k| under the two-thirds rule.

    Chosen as the largest integer with 3*cutoff < K, so quadratic
    aliases k1 + k2 - K of retained modes land strictly outside the
    retained band.
    """
    return (n_modes - 1) // 3


def _multiplier_array(spec: Spectrum, values: np.ndarray) -> np.ndarray:
    if is_extended_array(spec.coeffs):
        return np.array(list(values), dtype=object)
    return values


def derivative(spectrum: Spectrum, order: int = 1) -> Spectrum:
    """Spectral derivative: u_hat[k] -> (i k)^order u_hat[k].

    Odd orders zero the Nyquist slot: the unpaired mode has no
    conjugate partner, and an imaginary multiple of it cannot belong to
    a real field.
    """
    if order < 0:
        raise ValueError("derivative order must be nonnegative")
    K = spectrum.grid.n_modes
    k = spectrum.wavenumbers()
    with working_context(spectrum.coeffs):
        if is_extended_array(spectrum.coeffs):
            factor = np.array([mp.mpc(0, int(kk)) ** order for kk in k], dtype=object)
        else:
            factor = (1j * k.astype(np.float64)) ** order
        coeffs = spectrum.coeffs * factor
        if order % 2 == 1:
            coeffs[K // 2] = coeffs[K // 2] * 0
    return Spectrum(spectrum.grid, coeffs)


def helmholtz_inverse_dx(spectrum: Spectrum) -> Spectrum:
    """Apply the symbol i*k / (1 + k^2), i.e. (1 - d_xx)^{-1} d_x.

    The k = 0 slot is annihilated by the symbol; the Nyquist slot is
    zeroed explicitly because the symbol is odd.
    """
    K = spectrum.grid.n_modes
    k = spectrum.wavenumbers()
    with working_context(spectrum.coeffs):
        if is_extended_array(spectrum.coeffs):
            factor = np.array(
                [mp.mpc(0, int(kk)) / (1 + int(kk) ** 2) for kk in k], dtype=object
            )
        else:
            kf = k.astype(np.float64)
            factor = 1j * kf / (1.0 + kf * kf)
        coeffs = spectrum.coeffs * factor
        coeffs[K // 2] = coeffs[K // 2] * 0
    return Spectrum(spectrum.grid, coeffs)


def _truncate_upper_third(spectrum: Spectrum) -> Spectrum:
    K = spectrum.grid.n_modes
    cutoff = dealias_cutoff(K)
    mask = np.abs(spectrum.wavenumbers()) > cutoff
    coeffs = spectrum.coeffs.copy()
    coeffs[mask] = coeffs[mask] * 0
    return Spectrum(spectrum.grid, coeffs)


def _zero_nyquist(coeffs: np.ndarray, K: int) -> None:
    coeffs[K // 2] = coeffs[K // 2] * 0


def _checked_field(values: np.ndarray, what: str) -> None:
    if not all_finite(values):
        raise BlowUpOverflowError(f"{what} overflowed in physical space")


def nonlinear_products(spectrum: Spectrum, options: RhsOptions) -> tuple[Spectrum, Spectrum, Spectrum]:
    """Pseudospectral (u u_x, u^2, u_x^2) as spectra.

    Overflowing physical-space values raise BlowUpOverflowError; the
    Nyquist slot of each product is zeroed.
    """
    K = spectrum.grid.n_modes
    with working_context(spectrum.coeffs):
        base = _truncate_upper_third(spectrum) if options.dealias else spectrum
        u = inverse_transform(base).values
        ux = inverse_transform(derivative(base, 1)).values
        _checked_field(u, "velocity")
        _checked_field(ux, "velocity gradient")
        grid = spectrum.grid
        products = []
        # overflow here is detected and reported as a blow-up, not a warning
        with np.errstate(over="ignore", invalid="ignore"):
            pairs = ((u * ux, "u*u_x"), (u * u, "u^2"), (ux * ux, "u_x^2"))
        for values, what in pairs:
            _checked_field(values, what)
            prod = forward_transform(PeriodicField(grid, values))
            if options.dealias:
                prod = _truncate_upper_third(prod)
            coeffs = prod.coeffs.copy()
            _zero_nyquist(coeffs, K)
            products.append(Spectrum(grid, coeffs))
    return products[0], products[1], products[2]


def rhs(spectrum: Spectrum, options: RhsOptions) -> Spectrum:
    """Time derivative of the spectrum under the b-family dynamics.

    The k = 0 component is set to exact zero: the advective product has
    zero discrete mean (its positive and negative wavenumber
    contributions cancel in exact arithmetic) and the nonlocal symbol
    vanishes at k = 0, so zeroing only removes round-off.
    """
    adv, u_sq, ux_sq = nonlinear_products(spectrum, options)
    b = options.b
    with working_context(spectrum.coeffs):
        if is_extended_array(spectrum.coeffs):
            half_b = mp.mpf(b) / 2
            half_rest = (3 - mp.mpf(b)) / 2
        else:
            half_b = b / 2.0
            half_rest = (3.0 - b) / 2.0
        stress = Spectrum(
            spectrum.grid, half_b * u_sq.coeffs + half_rest * ux_sq.coeffs
        )
        nonlocal_part = helmholtz_inverse_dx(stress)
        coeffs = -(adv.coeffs + nonlocal_part.coeffs)
        coeffs[0] = coeffs[0] * 0
    return Spectrum(spectrum.grid, coeffs)
