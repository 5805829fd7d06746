"""Complex-singularity tracking from Fourier-spectrum decay.

A function analytic in a strip of half-width delta around the real
axis, with its nearest complex singularity a branch point of order
alpha sitting at abscissa x_star, has Fourier magnitudes that decay
asymptotically like

    |u_hat[k]| ~ C * k**(-s) * exp(-delta*k),      s = 1 + alpha,

while the phases advance linearly, arg(u_hat[k]) ~ const - k*x_star.
Three consecutive magnitudes determine (s, delta, log C) exactly on
that model:

    s(k)     = log( m[k-1]*m[k+1] / m[k]**2 ) / log( k**2 / ((k-1)*(k+1)) )
    delta(k) = log( m[k]/m[k+1] ) + s(k)*log( k/(k+1) )
    log C(k) = log m[k] + s(k)*log k + k*delta(k)

Real spectra only approach the model as k grows, so the sliding
estimates form sequences in k whose limits are extracted with Wynn's
epsilon algorithm.  The algebraic character reported to callers is
alpha = s - 1: the fitted power s includes the +1 that integrating a
branch point against exp(-i*k*x) always contributes.

delta falling toward the grid's resolution limit 2*pi/K signals a real
singularity forming; linear extrapolation of delta(t) to zero estimates
the blow-up time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import mpmath as mp
import numpy as np

from .core import Spectrum
from .errors import EmptyWindowError, InsufficientDataError, NoiseFloorError
from .integrator import Trajectory
from .precision import to_float, ulp_for, working_context

# A mode participates in fits only if its magnitude exceeds this many
# units of round-off relative to the spectrum's largest magnitude.
NOISE_FLOOR_FACTOR = 1e3

# Near-singular denominator guard for the epsilon table, relative to
# the entries feeding the reciprocal.
WYNN_RTOL = 1e-12


def _is_mp(x) -> bool:
    return isinstance(x, (mp.mpf, mp.mpc))


def _ln(x):
    return mp.log(x) if _is_mp(x) else math.log(x)


def _ratio_log(num_sq: int, den_sq: int, extended: bool):
    """log(num_sq / den_sq) for exact integers, accurately near 1."""
    if extended:
        return mp.log(mp.mpf(num_sq) / den_sq)
    return math.log1p((num_sq - den_sq) / den_sq)


def default_k_min(n_modes: int) -> int:
    """Default lower edge of the fit window: max(8, K/16)."""
    return max(8, n_modes // 16)


@dataclass(frozen=True)
class FitOptions:
    """Window and extrapolation controls for spectrum fits.

    ``k_min``/``k_max`` bound the sliding window (None: max(8, K/16)
    and the noise-floor index).  The noise floor is
    ``noise_floor_factor`` units of round-off below the spectrum peak.
    """

    k_min: Optional[int] = None
    k_max: Optional[int] = None
    noise_floor_factor: float = NOISE_FLOOR_FACTOR
    wynn_rtol: float = WYNN_RTOL


@dataclass(frozen=True)
class FitResult:
    """One spectrum's singularity parameters.

    ``alpha`` is the algebraic character (branch-point order), ``delta``
    the analyticity-strip half-width, ``x_star`` the singularity
    abscissa in [-pi, pi), ``amplitude`` the prefactor C, ``k_window``
    the wavenumber range actually fitted, and ``residual`` the RMS
    log-magnitude misfit of the extrapolated model over that window.
    ``delta_clamped`` flags a (slightly) negative raw width estimate
    that was clamped to zero.
    """

    amplitude: float
    alpha: float
    delta: float
    x_star: float
    k_window: tuple[int, int]
    residual: float
    delta_clamped: bool = False


@dataclass(frozen=True)
class SlidingFit:
    """Sliding three-point estimates indexed by wavenumber."""

    k: tuple[int, ...]
    s: tuple
    delta: tuple
    log_c: tuple


def noise_floor(spectrum: Spectrum, factor: float = NOISE_FLOOR_FACTOR):
    """Magnitude below which modes are considered round-off noise."""
    return factor * ulp_for(spectrum.coeffs) * spectrum.max_magnitude()


def local_fit(spectrum: Spectrum, k: int, noise_floor_factor: float = NOISE_FLOOR_FACTOR):
    """Fit (s, delta, log C) from the magnitude triple at k-1, k, k+1.

    Exact on the pure decay model.  Requires 2 <= k <= K/2 - 2 and all
    three magnitudes above the noise floor.
    """
    K = spectrum.grid.n_modes
    if not 2 <= k <= K // 2 - 2:
        raise ValueError(f"fit wavenumber must lie in [2, {K // 2 - 2}], got {k}")
    with working_context(spectrum.coeffs):
        mags = spectrum.magnitudes_nonnegative()
        floor = noise_floor(spectrum, noise_floor_factor)
        triple = mags[k - 1], mags[k], mags[k + 1]
        if not all(m > floor for m in triple):
            raise NoiseFloorError(
                f"magnitudes around k={k} sit at or below the noise floor {float(floor):.3e}"
            )
        return _local_fit_from_triple(triple, k)


def _local_fit_from_triple(triple, k: int):
    m_lo, m_mid, m_hi = triple
    extended = _is_mp(m_mid)
    num = _ln((m_lo / m_mid) * (m_hi / m_mid))
    den = _ratio_log(k * k, (k - 1) * (k + 1), extended)
    s = num / den
    if extended:
        step = mp.log(mp.mpf(k) / (k + 1))
        ln_k = mp.log(k)
    else:
        step = -math.log1p(1.0 / k)
        ln_k = math.log(k)
    delta = _ln(m_mid / m_hi) + s * step
    log_c = _ln(m_mid) + s * ln_k + k * delta
    return s, delta, log_c


def sliding_fit(spectrum: Spectrum, ks: Sequence[int],
                noise_floor_factor: float = NOISE_FLOOR_FACTOR) -> SlidingFit:
    """Apply the three-point fit across a window of wavenumbers."""
    out_k, out_s, out_d, out_c = [], [], [], []
    with working_context(spectrum.coeffs):
        mags = spectrum.magnitudes_nonnegative()
        floor = noise_floor(spectrum, noise_floor_factor)
        K = spectrum.grid.n_modes
        for k in ks:
            if not 2 <= k <= K // 2 - 2:
                continue
            triple = mags[k - 1], mags[k], mags[k + 1]
            if not all(m > floor for m in triple):
                continue
            s, d, c = _local_fit_from_triple(triple, k)
            out_k.append(int(k))
            out_s.append(s)
            out_d.append(d)
            out_c.append(c)
    if not out_k:
        raise EmptyWindowError("no admissible wavenumbers in the requested window")
    return SlidingFit(k=tuple(out_k), s=tuple(out_s), delta=tuple(out_d), log_c=tuple(out_c))


def wynn_epsilon(seq: Sequence, rtol: float = WYNN_RTOL):
    """Accelerate a sequence with Wynn's epsilon recursion.

    Builds the table column by column,

        eps[-1] = 0,  eps[0] = seq,
        eps[c+1][n] = eps[c-1][n+1] + 1/(eps[c][n+1] - eps[c][n]),

    and returns ``(limit, depth)``: the deepest entry of the deepest
    even column built without meeting a near-singular denominator
    (|difference| <= rtol * scale of its operands), together with that
    column's index.  A sequence whose first differences are all below
    tolerance is already converged: its last element is returned with
    depth 0.  Exact on geometric sequences L + a*r**n after one even
    column.
    """
    values = list(seq)
    if len(values) < 3:
        raise ValueError("epsilon acceleration needs at least 3 sequence entries")

    def near_singular(d, a, b) -> bool:
        return abs(d) <= rtol * (abs(a) + abs(b))

    diffs = [values[i + 1] - values[i] for i in range(len(values) - 1)]
    if all(near_singular(d, values[i + 1], values[i]) for i, d in enumerate(diffs)):
        return values[-1], 0

    best = (values[-1], 0)
    prev_prev = [0 * values[0]] * len(values)
    prev = values
    col = 0
    while len(prev) >= 2:
        col += 1
        nxt = []
        clean = True
        for i in range(len(prev) - 1):
            d = prev[i + 1] - prev[i]
            if near_singular(d, prev[i + 1], prev[i]):
                clean = False
                break
            nxt.append(prev_prev[i + 1] + 1 / d)
        if not clean or not nxt:
            break
        if col % 2 == 0:
            best = (nxt[-1], col)
        prev_prev, prev = prev, nxt
    return best


def _wrap_to_pi(x):
    if _is_mp(x):
        two_pi = 2 * mp.pi
        return (x + mp.pi) % two_pi - mp.pi
    return (x + math.pi) % (2.0 * math.pi) - math.pi


def estimate_x_star(spectrum: Spectrum, ks: Sequence[int]):
    """Singularity abscissa from the phase drift of the coefficients.

    On the decay model arg(u_hat[k]) = const - k*x_star, so the
    least-squares slope of the unwrapped phase against k, negated and
    reduced mod 2*pi to [-pi, pi), estimates x_star.  The phases are
    demodulated by a circular-mean pre-estimate of the per-mode
    increment before unwrapping, which keeps the branch choice stable.
    """
    ks = [int(k) for k in ks]
    if len(ks) < 2:
        raise EmptyWindowError("phase fit needs at least 2 wavenumbers")
    with working_context(spectrum.coeffs):
        coeffs = [spectrum.coeffs[k] for k in ks]
        extended = _is_mp(coeffs[0])
        arg = mp.arg if extended else (lambda z: math.atan2(z.imag, z.real))
        # circular mean of consecutive phase increments
        acc = mp.mpc(0) if extended else 0.0j
        for (k1, c1), (k2, c2) in zip(zip(ks, coeffs), zip(ks[1:], coeffs[1:])):
            if k2 == k1 + 1 and abs(c1) > 0 and abs(c2) > 0:
                z = c2 / c1
                acc += z / abs(z)
        if abs(acc) == 0:
            increment = 0 * coeffs[0].real
        else:
            increment = arg(acc)
        # unwrap the demodulated phases to the nearest branch
        two_pi = 2 * mp.pi if extended else 2.0 * math.pi
        phases = []
        for k, c in zip(ks, coeffs):
            phi = arg(c) - increment * k
            if phases:
                n_wraps = round(to_float(phases[-1] - phi) / to_float(two_pi))
                phi = phi + n_wraps * two_pi
            phases.append(phi)
        # least-squares slope of phase against k
        n = len(ks)
        k_mean = sum(ks) / (mp.mpf(n) if extended else float(n))
        p_mean = sum(phases) / n
        sxx = sum((k - k_mean) ** 2 for k in ks)
        sxy = sum((k - k_mean) * (p - p_mean) for k, p in zip(ks, phases))
        slope = increment + sxy / sxx
        return _wrap_to_pi(-slope)


def _fit_window(spectrum: Spectrum, options: FitOptions) -> list[int]:
    K = spectrum.grid.n_modes
    k_lo = options.k_min if options.k_min is not None else default_k_min(K)
    k_hi = options.k_max if options.k_max is not None else K // 2 - 2
    k_lo = max(2, k_lo)
    k_hi = min(K // 2 - 2, k_hi)
    mags = spectrum.magnitudes_nonnegative()
    floor = noise_floor(spectrum, options.noise_floor_factor)
    ks = []
    for k in range(k_lo, k_hi + 1):
        if mags[k - 1] > floor and mags[k] > floor and mags[k + 1] > floor:
            ks.append(k)
        else:
            # magnitudes decay with k: the first crossing is the floor index
            break
    return ks


def fit_spectrum(spectrum: Spectrum, options: FitOptions = FitOptions()) -> FitResult:
    """Estimate (C, alpha, delta, x_star) from one spectrum.

    Runs the sliding three-point fit over the admissible window, Wynn
    extrapolation on each estimate sequence, and a phase fit for the
    abscissa.  A raw negative strip width is clamped to zero and
    flagged.  Raises EmptyWindowError when fewer than three admissible
    wavenumbers remain.
    """
    with working_context(spectrum.coeffs):
        ks = _fit_window(spectrum, options)
        if len(ks) < 3:
            raise EmptyWindowError(
                f"fit window holds {len(ks)} admissible wavenumbers; need at least 3"
            )
        sliding = sliding_fit(spectrum, ks, options.noise_floor_factor)
        s_lim, _ = wynn_epsilon(sliding.s, options.wynn_rtol)
        delta_lim, _ = wynn_epsilon(sliding.delta, options.wynn_rtol)
        log_c_lim, _ = wynn_epsilon(sliding.log_c, options.wynn_rtol)
        x_star = estimate_x_star(spectrum, ks)

        clamped = to_float(delta_lim) < 0.0
        delta_out = 0 * abs(delta_lim) if clamped else delta_lim

        mags = spectrum.magnitudes_nonnegative()
        extended = _is_mp(s_lim)
        sq_sum = 0.0
        for k in ks:
            ln_k = mp.log(k) if extended else math.log(k)
            model = log_c_lim - s_lim * ln_k - delta_lim * k
            dev = to_float(_ln(mags[k]) - model)
            sq_sum += dev * dev
        residual = math.sqrt(sq_sum / len(ks))

        exp_c = mp.exp(log_c_lim) if _is_mp(log_c_lim) else math.exp(log_c_lim)
        return FitResult(
            amplitude=exp_c,
            alpha=s_lim - 1,
            delta=delta_out,
            x_star=x_star,
            k_window=(ks[0], ks[-1]),
            residual=residual,
            delta_clamped=clamped,
        )


@dataclass(frozen=True)
class TrackOptions:
    """Per-snapshot fit options plus blow-up extrapolation controls.

    The blow-up time is extrapolated from the last
    ``extrapolation_samples`` snapshots whose fit residual stays under
    ``max_residual`` and whose width estimate stays at or above
    ``extrapolation_min_delta`` (default: a quarter of the grid's
    resolution limit).  Width estimates from deeper snapshots flatten
    as truncation regularizes the collapse, which would bias the zero
    crossing late; the gated band keeps the extrapolation on the clean
    part of the decay.
    """

    fit: FitOptions = field(default_factory=FitOptions)
    extrapolation_samples: int = 5
    max_residual: float = 0.15
    extrapolation_min_delta: Optional[float] = None


@dataclass(frozen=True)
class SingularityTrace:
    """Fitted singularity parameters along a trajectory.

    ``t_s_estimate`` is the extrapolated time at which the strip width
    reaches zero (None when the width shows no significant decay), with
    a delta-method standard error (NaN when only two samples exist).
    """

    times: tuple[float, ...]
    fits: tuple[FitResult, ...]
    t_s_estimate: Optional[float]
    t_s_stderr: Optional[float]

    def deltas(self) -> np.ndarray:
        return np.array([to_float(f.delta) for f in self.fits])

    def alphas(self) -> np.ndarray:
        return np.array([to_float(f.alpha) for f in self.fits])


def extrapolate_blowup_time(times: Sequence[float], deltas: Sequence[float]):
    """Linear extrapolation of delta(t) to zero with uncertainty.

    Fits delta ~ c0 + c1*t by least squares over the supplied samples
    and returns (t_s, stderr): the zero crossing -c0/c1 and its
    delta-method standard error.  Returns (None, None) when the slope
    is nonnegative or (with 3+ samples) not significantly negative at
    two standard errors.
    """
    t = np.asarray([float(v) for v in times])
    d = np.asarray([float(v) for v in deltas])
    n = len(t)
    if n < 2:
        raise InsufficientDataError("need at least 2 (t, delta) samples to extrapolate")
    t_mean = t.mean()
    d_mean = d.mean()
    sxx = float(np.sum((t - t_mean) ** 2))
    if sxx == 0.0:
        return None, None
    c1 = float(np.sum((t - t_mean) * (d - d_mean)) / sxx)
    c0 = d_mean - c1 * t_mean
    if n >= 3:
        resid = d - (c0 + c1 * t)
        sigma_sq = float(np.sum(resid**2)) / (n - 2)
        var_c1 = sigma_sq / sxx
        var_c0 = sigma_sq * (1.0 / n + t_mean**2 / sxx)
        cov_01 = -sigma_sq * t_mean / sxx
        if c1 >= 0.0 or abs(c1) < 2.0 * math.sqrt(var_c1):
            return None, None
        t_s = -c0 / c1
        g0 = -1.0 / c1
        g1 = c0 / c1**2
        var_ts = g0 * g0 * var_c0 + 2.0 * g0 * g1 * cov_01 + g1 * g1 * var_c1
        return t_s, math.sqrt(max(var_ts, 0.0))
    if c1 >= 0.0:
        return None, None
    return -c0 / c1, float("nan")


def track(trajectory: Trajectory, options: TrackOptions = TrackOptions()) -> SingularityTrace:
    """Fit every snapshot and extrapolate the blow-up time.

    Snapshots whose spectra never rise above the noise floor in the fit
    window are skipped; fewer than two usable snapshots raise
    InsufficientDataError.
    """
    times, fits = [], []
    for t, snapshot in zip(trajectory.times, trajectory.snapshots):
        try:
            fits.append(fit_spectrum(snapshot, options.fit))
            times.append(t)
        except (EmptyWindowError, NoiseFloorError):
            continue
    if len(fits) < 2:
        raise InsufficientDataError(
            f"only {len(fits)} snapshots admit a spectrum fit; need at least 2"
        )
    gate = options.extrapolation_min_delta
    if gate is None:
        gate = trajectory.config.grid.resolution_limit / 4
    clean = [
        i
        for i in range(len(fits))
        if fits[i].residual < options.max_residual and to_float(fits[i].delta) >= gate
    ]
    if len(clean) < 2:
        clean = list(range(len(fits)))
    sel = clean[-options.extrapolation_samples :]
    t_s, stderr = extrapolate_blowup_time(
        [times[i] for i in sel], [to_float(fits[i].delta) for i in sel]
    )
    return SingularityTrace(
        times=tuple(times),
        fits=tuple(fits),
        t_s_estimate=t_s,
        t_s_stderr=stderr,
    )


def late_time_alpha(
    trace: SingularityTrace, samples: int = 3, max_residual: float = 0.15
) -> float:
    """Mean fitted algebraic character over the last well-fitted snapshots.

    The character estimate keeps its meaning after the width estimate
    drops below the grid floor (the algebraic part of the decay is
    still resolved), so unlike the blow-up extrapolation this keeps the
    deepest snapshots; only fits whose residual reaches
    ``max_residual`` are discarded as transients.
    """
    good = [to_float(f.alpha) for f in trace.fits if f.residual < max_residual]
    if not good:
        raise InsufficientDataError(
            "no snapshot fit stays under the residual gate"
        )
    return float(np.mean(good[-samples:]))


def strip_monitor(options: FitOptions = FitOptions()) -> Callable[[float, Spectrum], Optional[float]]:
    """Monitor callback for the integrator's early-stop policy.

    Returns the fitted strip width per snapshot, or None while the
    spectrum cannot be fitted (window empty early in a run).
    """

    def monitor(t: float, spectrum: Spectrum) -> Optional[float]:
        try:
            return to_float(fit_spectrum(spectrum, options).delta)
        except (EmptyWindowError, NoiseFloorError):
            return None

    return monitor
