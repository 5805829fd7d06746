"""Oracle fields with an analytically known nearest complex singularity.

The family

    f(x) = amplitude * Re[ (1 - exp(-delta) * exp(i*(x - x_star)))**alpha ]

is periodic, real analytic in the strip |Im z| < delta, and its nearest
singularities are branch points of order alpha at z = x_star + i*delta
(and the conjugate).  Its Fourier coefficients are known in closed form
through the binomial series (1 - w)**alpha = sum_k binom(alpha, k) (-w)**k:

    u_hat[0] = amplitude,
    u_hat[k] = (amplitude/2) * binom(alpha, k) * (-1)**k
               * exp(-delta*k) * exp(-i*k*x_star),      k >= 1,

with u_hat[-k] the conjugate.  The coefficients are generated by the
stable product recurrence for the binomial term, never through Gamma
functions, so no cancellation enters at large k.

Non-integer alpha gives a genuine branch point; a nonnegative integer
alpha truncates the series to a trigonometric polynomial (an entire
function with nothing to track), which is still permitted as a
degenerate member of the family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .core import GridSpec, PeriodicField, Spectrum
from .errors import ConfigError
from .precision import DOUBLE, Precision


@dataclass(frozen=True)
class SyntheticSpec:
    """Branch-point parameters: character, strip width, abscissa, scale.

    ``delta`` must be positive and ``amplitude`` positive.  ``alpha``
    may be any real number; nonnegative integers degenerate to
    trigonometric polynomials (binomial series truncates).
    """

    alpha: float
    delta: float
    x_star: float
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and math.isfinite(self.delta)
                and math.isfinite(self.x_star) and math.isfinite(self.amplitude)):
            raise ConfigError("synthetic parameters must be finite")
        if self.delta <= 0:
            raise ConfigError(f"strip width must be positive, got {self.delta}")
        if self.amplitude <= 0:
            raise ConfigError(f"amplitude must be positive, got {self.amplitude}")


def oracle_field(spec: SyntheticSpec, grid: GridSpec,
                 precision: Precision = DOUBLE) -> PeriodicField:
    """Sample the oracle function on the grid.

    The base 1 - exp(-delta)*exp(i*theta) keeps a positive real part,
    so the principal power equals the binomial series everywhere.
    """
    x = grid.nodes(precision)
    if precision.is_double:
        w = np.exp(-spec.delta + 1j * (x - spec.x_star))
        values = spec.amplitude * np.real((1.0 - w) ** spec.alpha)
    else:
        with precision.context():
            alpha = mp.mpf(spec.alpha)
            values = np.array(
                [spec.amplitude * mp.re((1 - mp.exp(mp.mpc(-spec.delta, xj - spec.x_star))) ** alpha)
                 for xj in x],
                dtype=object,
            )
    return PeriodicField(grid=grid, values=values)


def _coefficient_table(spec: SyntheticSpec, count: int, precision: Precision):
    """One-sided coefficients u_hat[k] for k = 0 .. count-1."""
    if precision.is_double:
        table = np.zeros(count, dtype=np.complex128)
        table[0] = spec.amplitude
        signed = 1.0  # (-1)**k * binom(alpha, k)
        for k in range(1, count):
            signed *= (k - 1 - spec.alpha) / k
            table[k] = (0.5 * spec.amplitude * signed
                        * math.exp(-spec.delta * k)
                        * complex(math.cos(k * spec.x_star), -math.sin(k * spec.x_star)))
        return table
    with precision.context():
        alpha = mp.mpf(spec.alpha)
        delta = mp.mpf(spec.delta)
        x_star = mp.mpf(spec.x_star)
        half = mp.mpf(spec.amplitude) / 2
        table = np.empty(count, dtype=object)
        table[0] = mp.mpc(spec.amplitude)
        signed = mp.mpf(1)
        for k in range(1, count):
            signed *= (k - 1 - alpha) / k
            table[k] = half * signed * mp.exp(-delta * k) * mp.expj(-k * x_star)
        return table


def oracle_coefficients(spec: SyntheticSpec, k: int,
                        precision: Precision = DOUBLE) -> complex:
    """Closed-form coefficient u_hat[k] of the oracle function, k >= 0."""
    if k < 0:
        raise ValueError(f"coefficient index must be nonnegative, got {k}")
    return _coefficient_table(spec, k + 1, precision)[k]


def oracle_spectrum(spec: SyntheticSpec, grid: GridSpec,
                    precision: Precision = DOUBLE) -> Spectrum:
    """Assemble the truncated oracle spectrum directly from closed form.

    Slots 0 .. K/2-1 take the series coefficients, negative slots their
    conjugates; the unpaired half-mode slot is zeroed (its true
    coefficient is below round-off whenever delta*K/2 is large enough
    for the truncation to be meaningful).
    """
    K = grid.n_modes
    table = _coefficient_table(spec, K // 2, precision)
    if precision.is_double:
        coeffs = np.zeros(K, dtype=np.complex128)
        coeffs[: K // 2] = table
        coeffs[K // 2] = 0.0
        coeffs[K // 2 + 1:] = np.conj(table[1:][::-1])
    else:
        with precision.context():
            coeffs = np.empty(K, dtype=object)
            coeffs[: K // 2] = table
            coeffs[K // 2] = mp.mpc(0)
            for k in range(1, K // 2):
                coeffs[K - k] = mp.conj(table[k])
    return Spectrum(grid=grid, coeffs=coeffs)
