"""Grid, field and spectrum value types with fixed transform conventions.

The domain is the periodic interval [-pi, pi) sampled at K equispaced
nodes x_j = -pi + j*(2*pi/K).  Fourier coefficients follow

    u_hat[k] = (1/K) * sum_j u(x_j) * exp(-i*k*x_j),   k = -K/2 .. K/2-1,

so that u(x_j) = sum_k u_hat[k] * exp(i*k*x_j).  Coefficients are stored
in FFT slot order (0 .. K/2-1, -K/2 .. -1); ``Spectrum.wavenumbers``
gives the integer wavenumber per slot and ``Spectrum.coeff`` indexes by
wavenumber.  Forward transforms of real fields mirror the negative modes
from the nonnegative half explicitly, so Hermitian symmetry holds
exactly, not just to round-off.

Discrete Parseval identity under this normalisation:

    (1/K) * sum_j u_j**2 == sum_k |u_hat[k]|**2
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import mpmath as mp
import numpy as np

from .errors import NonFiniteFieldError, OddResolutionError, SymmetryError
from .precision import (
    DOUBLE,
    Precision,
    all_finite,
    is_extended_array,
    ulp_for,
    working_context,
)

MIN_MODES = 8

# Relative tolerance (in units of round-off) for the Hermitian-symmetry
# check on inverse transforms.  The pipeline maintains symmetry exactly,
# so any measurable violation signals corrupted input.
SYMMETRY_RTOL_ULPS = 1e3

TYPE_I = "type1"    # u0(x) = sin(x)
TYPE_II = "type2"   # u0(x) = 1 + sin(x)


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on [-pi, pi) with an even number of modes."""

    n_modes: int

    def __post_init__(self) -> None:
        if not isinstance(self.n_modes, (int, np.integer)):
            raise OddResolutionError(f"n_modes must be an integer, got {self.n_modes!r}")
        if self.n_modes % 2 != 0:
            raise OddResolutionError(f"n_modes must be even, got {self.n_modes}")
        if self.n_modes < MIN_MODES:
            raise OddResolutionError(f"n_modes must be at least {MIN_MODES}, got {self.n_modes}")

    @property
    def spacing(self) -> float:
        return 2.0 * np.pi / self.n_modes

    def nodes(self, precision: Precision = DOUBLE) -> np.ndarray:
        """Node positions x_j = -pi + j*2*pi/K in the requested scalar mode."""
        K = self.n_modes
        if precision.is_double:
            return -np.pi + (2.0 * np.pi / K) * np.arange(K)
        with precision.context():
            return np.array([mp.pi * mp.mpf(2 * j - K) / K for j in range(K)], dtype=object)

    def wavenumbers(self) -> np.ndarray:
        """Integer wavenumbers in FFT slot order: 0..K/2-1, -K/2..-1."""
        K = self.n_modes
        return np.concatenate([np.arange(0, K // 2), np.arange(-K // 2, 0)])

    @property
    def resolution_limit(self) -> float:
        """Smallest analyticity-strip width the grid can distinguish, 2*pi/K."""
        return 2.0 * np.pi / self.n_modes


def make_grid(n_modes: int) -> GridSpec:
    """Validated grid constructor."""
    return GridSpec(n_modes)


def _frozen_copy(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PeriodicField:
    """Real samples of a periodic function on the grid nodes."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values)
        if values.shape != (self.grid.n_modes,):
            raise ValueError(
                f"expected {self.grid.n_modes} samples, got shape {values.shape}"
            )
        if not all_finite(values):
            raise NonFiniteFieldError("field samples must be finite")
        object.__setattr__(self, "values", _frozen_copy(values))

    def nodes(self, precision: Precision = DOUBLE) -> np.ndarray:
        return self.grid.nodes(precision)


@dataclass(frozen=True)
class Spectrum:
    """Fourier coefficients in FFT slot order under the fixed convention.

    Construction checks only shape; Hermitian symmetry is guaranteed by
    the operations that produce spectra and re-verified (with a
    round-off tolerance) whenever a spectrum is pushed back to physical
    space.
    """

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coeffs)
        if coeffs.shape != (self.grid.n_modes,):
            raise ValueError(
                f"expected {self.grid.n_modes} coefficients, got shape {coeffs.shape}"
            )
        if coeffs.dtype != object:
            coeffs = coeffs.astype(np.complex128)
        object.__setattr__(self, "coeffs", _frozen_copy(coeffs))

    def wavenumbers(self) -> np.ndarray:
        return self.grid.wavenumbers()

    def coeff(self, k: int):
        """Coefficient for integer wavenumber k in [-K/2, K/2-1]."""
        K = self.grid.n_modes
        if not -K // 2 <= k <= K // 2 - 1:
            raise IndexError(f"wavenumber {k} outside [-{K // 2}, {K // 2 - 1}]")
        return self.coeffs[k % K]

    def magnitudes_nonnegative(self) -> np.ndarray:
        """|u_hat[k]| for k = 0 .. K/2 (Nyquist slot included last)."""
        K = self.grid.n_modes
        half = np.concatenate([self.coeffs[: K // 2], self.coeffs[K // 2 : K // 2 + 1]])
        return np.abs(half)

    def max_magnitude(self):
        return np.abs(self.coeffs).max()

    def symmetry_defect(self) -> float:
        """Largest violation of u_hat[-k] == conj(u_hat[k]), k=0 included."""
        K = self.grid.n_modes
        c = self.coeffs
        pos = c[1 : K // 2]
        neg = c[: K // 2 : -1]  # slots K-1 .. K/2+1, i.e. k = -1 .. -(K/2-1)
        if is_extended_array(c):
            defects = [abs(mp.im(c[0])), abs(mp.im(c[K // 2]))]
            defects.append(max((abs(a - mp.conj(b)) for a, b in zip(neg, pos)), default=0))
            return float(max(defects))
        mirror = float(np.abs(neg - np.conj(pos)).max()) if K > 2 else 0.0
        return max(abs(complex(c[0]).imag), abs(complex(c[K // 2]).imag), mirror)


def _is_hermitian_ok(spec: Spectrum) -> bool:
    scale = spec.max_magnitude()
    tol = SYMMETRY_RTOL_ULPS * ulp_for(spec.coeffs) * max(float(scale), 1e-300)
    return spec.symmetry_defect() <= tol


def _assemble_from_half(grid: GridSpec, half: np.ndarray) -> np.ndarray:
    """Build a full slot-ordered coefficient array from modes k=0..K/2.

    The k=0 and Nyquist entries are forced real and the negative modes
    are set to explicit conjugates, so the result is Hermitian exactly.
    """
    K = grid.n_modes
    if is_extended_array(half):
        coeffs = np.empty(K, dtype=object)
        coeffs[0] = mp.mpc(mp.re(half[0]))
        coeffs[K // 2] = mp.mpc(mp.re(half[K // 2]))
        for k in range(1, K // 2):
            coeffs[k] = half[k]
            coeffs[K - k] = mp.conj(half[k])
        return coeffs
    coeffs = np.empty(K, dtype=np.complex128)
    coeffs[0] = half[0].real
    coeffs[K // 2] = half[K // 2].real
    coeffs[1 : K // 2] = half[1 : K // 2]
    coeffs[K // 2 + 1 :] = np.conj(half[1 : K // 2][::-1])
    return coeffs


def _alternating_signs(n: int) -> np.ndarray:
    signs = np.ones(n)
    signs[1::2] = -1.0
    return signs


def _mp_fft(a: list) -> list:
    """Radix-2 forward DFT, sum_j a_j exp(-2*pi*i*j*k/n), on mpmath scalars."""
    n = len(a)
    if n == 1:
        return list(a)
    if n % 2:
        return [
            sum(a[j] * mp.expjpi(mp.mpf(-2 * ((j * k) % n)) / n) for j in range(n))
            for k in range(n)
        ]
    even = _mp_fft(a[0::2])
    odd = _mp_fft(a[1::2])
    out = [None] * n
    for m in range(n // 2):
        tw = mp.expjpi(mp.mpf(-2 * m) / n) * odd[m]
        out[m] = even[m] + tw
        out[m + n // 2] = even[m] - tw
    return out


def forward_transform(field: PeriodicField) -> Spectrum:
    """DFT of a real field under the fixed convention.

    Output symmetry is exact: the negative-k half is an explicit mirror
    of the nonnegative-k half.
    """
    K = field.grid.n_modes
    values = field.values
    if not all_finite(values):
        raise NonFiniteFieldError("cannot transform a non-finite field")
    if is_extended_array(values):
        with working_context(values):
            bins = _mp_fft([mp.mpc(v) for v in values])
            half = np.array(
                [bins[k] * ((-1) ** k) / K for k in range(K // 2 + 1)], dtype=object
            )
            return Spectrum(field.grid, _assemble_from_half(field.grid, half))
    bins = np.fft.rfft(values)
    half = bins * _alternating_signs(K // 2 + 1) / K
    return Spectrum(field.grid, _assemble_from_half(field.grid, half))


def inverse_transform(spectrum: Spectrum) -> PeriodicField:
    """Reconstruct the real field; rejects non-Hermitian input."""
    K = spectrum.grid.n_modes
    if not _is_hermitian_ok(spectrum):
        raise SymmetryError(
            "spectrum is not Hermitian within round-off; refusing to "
            "reconstruct a real field from corrupted coefficients"
        )
    coeffs = spectrum.coeffs
    if is_extended_array(coeffs):
        with working_context(coeffs):
            # (-1)**k per slot: k == m (mod 2) for even K, so (-1)**m works
            b = [coeffs[m] * ((-1) ** m) for m in range(K)]
            # exp(+...) transform via conjugation of the forward FFT
            bins = _mp_fft([mp.conj(v) for v in b])
            values = np.array([mp.re(mp.conj(v)) for v in bins], dtype=object)
            return PeriodicField(spectrum.grid, values)
    half = coeffs[: K // 2 + 1] * _alternating_signs(K // 2 + 1)
    values = np.fft.irfft(half, n=K) * K
    return PeriodicField(spectrum.grid, values)


InitialSpec = Union[str, PeriodicField, Callable]


def initial_datum(
    initial: InitialSpec, grid: GridSpec, precision: Precision = DOUBLE
) -> PeriodicField:
    """Build the initial field from a named profile, samples, or callable.

    Recognised names: ``type1`` (sin x) and ``type2`` (1 + sin x).  A
    callable receives node coordinates in the active scalar mode.
    """
    if isinstance(initial, PeriodicField):
        if initial.grid != grid:
            raise ValueError("supplied field lives on a different grid")
        return initial
    x = grid.nodes(precision)
    if callable(initial):
        with precision.context():
            if precision.is_double:
                values = np.asarray([float(initial(xj)) for xj in x])
            else:
                values = np.array([mp.mpf(initial(xj)) for xj in x], dtype=object)
        return PeriodicField(grid, values)
    if initial == TYPE_I:
        if precision.is_double:
            return PeriodicField(grid, np.sin(x))
        with precision.context():
            return PeriodicField(grid, np.array([mp.sin(xj) for xj in x], dtype=object))
    if initial == TYPE_II:
        if precision.is_double:
            return PeriodicField(grid, 1.0 + np.sin(x))
        with precision.context():
            return PeriodicField(grid, np.array([1 + mp.sin(xj) for xj in x], dtype=object))
    raise ValueError(f"unknown initial datum {initial!r}")
