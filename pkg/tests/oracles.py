"""Independent reference implementations used to pin expected values.

Everything here is deliberately naive: direct convolution sums, direct
series summation, high-precision arithmetic.  The package must agree
with these, not the other way around.
"""

import mpmath as mp
import numpy as np

from bfamily.core import GridSpec, PeriodicField, Spectrum, forward_transform


def random_field(grid: GridSpec, rng: np.random.Generator) -> PeriodicField:
    return PeriodicField(grid, rng.standard_normal(grid.n_modes))


def random_hermitian_spectrum(grid: GridSpec, rng: np.random.Generator) -> Spectrum:
    """Spectrum of a random real field; Hermitian exactly by construction."""
    return forward_transform(random_field(grid, rng))


def convolution_rhs(spectrum: Spectrum, b: float, cutoff: int) -> np.ndarray:
    """Right-hand side of the truncated mode system by exact convolution.

    Modes |k| <= cutoff are treated as the whole system: derivatives are
    exact symbol multiplications, products are O(K^2) convolution sums
    over retained modes, and the output is truncated to the band.  No
    FFTs anywhere.  Returns coefficients in FFT slot order.
    """
    K = spectrum.grid.n_modes
    band = range(-cutoff, cutoff + 1)
    u = {k: complex(spectrum.coeff(k)) for k in band}
    ux = {k: 1j * k * u[k] for k in band}

    def conv(a: dict, c: dict) -> dict:
        out = {}
        for k in band:
            acc = 0.0j
            for k1 in band:
                k2 = k - k1
                if -cutoff <= k2 <= cutoff:
                    acc += a[k1] * c[k2]
            out[k] = acc
        return out

    adv = conv(u, ux)
    u_sq = conv(u, u)
    ux_sq = conv(ux, ux)
    out = np.zeros(K, dtype=complex)
    for k in band:
        symbol = 1j * k / (1.0 + k * k)
        out[k % K] = -(adv[k] + symbol * ((b / 2.0) * u_sq[k] + ((3.0 - b) / 2.0) * ux_sq[k]))
    return out


def branch_point_series_coefficient(alpha, delta, x_star, amplitude, k: int, dps: int = 60):
    """Fourier coefficient of amplitude*Re[(1 - e^{-delta} e^{i(x-x*)})^alpha].

    Computed by summing the binomial series for (1-w)^alpha directly in
    high precision via mpmath's binomial (Gamma-based), independently of
    the package's recurrence.  Valid for k >= 0.
    """
    with mp.workdps(dps):
        # exact float -> mpf conversion; the package sees the same binary values
        a = mp.mpf(alpha)
        d = mp.mpf(delta)
        xs = mp.mpf(x_star)
        amp = mp.mpf(amplitude)
        if k == 0:
            return mp.mpc(amp)
        term = mp.binomial(a, k) * (-1) ** k * mp.e ** (-d * k) * mp.expj(-k * xs)
        return amp / 2 * term


def shanks_table_limit(seq, depth_even: int, dps: int = 60):
    """Wynn epsilon table evaluated in high precision, fixed even column.

    Returns the deepest entry of column ``depth_even`` computed at
    ``dps`` digits.  Used to pin expected values for the double
    implementation.
    """
    with mp.workdps(dps):
        prev_prev = [mp.mpf(0)] * len(seq)
        prev = [mp.mpf(str(s)) for s in seq]
        col = 0
        while col < depth_even and len(prev) >= 2:
            col += 1
            nxt = [
                prev_prev[i + 1] + 1 / (prev[i + 1] - prev[i])
                for i in range(len(prev) - 1)
            ]
            prev_prev, prev = prev, nxt
        return prev[-1]
