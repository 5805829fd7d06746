"""Fixed-step RK4 time integration of the spectral mode system.

The classical fourth-order Runge-Kutta scheme advances all Fourier
coefficients simultaneously with a fixed step.  No adaptivity: runs are
reproducible bit for bit, and the step budget is known up front.  The
k = 0 coefficient is conserved exactly because the right-hand side's
mean component is identically zero, so every stage contributes exact
zeros there.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import (
    GridSpec,
    InitialSpec,
    PeriodicField,
    Spectrum,
    forward_transform,
    initial_datum,
)
from .errors import BlowUpOverflowError, ConfigError
from .precision import DOUBLE, Precision, all_finite, is_extended_array
from .spectral import RhsOptions, rhs

# Default cap on the time step, and the advective safety factor in
# dt <= safety / (K * max|u0|).
DEFAULT_DT_CAP = 1e-4
CFL_SAFETY = 0.5

# Default wall-clock-free snapshot cadence, in simulated time units.
DEFAULT_SNAPSHOT_INTERVAL = 0.05


class StopReason(enum.Enum):
    REACHED_T_END = "reached_t_end"
    RESOLUTION_LIMIT = "resolution_limit"
    OVERFLOW = "overflow"


@dataclass(frozen=True)
class StopPolicy:
    """Early-termination rule for strip-width monitoring.

    ``min_strip_width`` is the running analyticity-strip estimate below
    which continuing is pointless (the singularity is within one grid
    spacing of the real axis); None means the grid default 2*pi/K.
    """

    min_strip_width: Optional[float] = None

    def threshold(self, grid: GridSpec) -> float:
        if self.min_strip_width is not None:
            return self.min_strip_width
        return grid.resolution_limit


@dataclass(frozen=True)
class BFamilyConfig:
    """Complete description of one simulation run."""

    b: float
    grid: GridSpec
    dt: float
    t_end: float
    initial: InitialSpec = "type1"
    dealias: bool = False
    sample_every: int = 1
    stop_policy: StopPolicy = field(default_factory=StopPolicy)
    precision: Precision = DOUBLE

    def __post_init__(self) -> None:
        if not (np.isfinite(self.b)):
            raise ConfigError(f"b must be finite, got {self.b}")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not (np.isfinite(self.t_end) and self.t_end > 0):
            raise ConfigError(f"t_end must be positive, got {self.t_end}")
        if not isinstance(self.sample_every, (int, np.integer)) or self.sample_every < 1:
            raise ConfigError(f"sample_every must be a positive integer, got {self.sample_every}")

    @property
    def rhs_options(self) -> RhsOptions:
        return RhsOptions(b=self.b, dealias=self.dealias)


def default_time_step(grid: GridSpec, u0: PeriodicField) -> float:
    """min(DEFAULT_DT_CAP, CFL_SAFETY / (K * max|u0|)).

    An advective stability budget: the fastest resolved wave moves at
    about max|u| across K modes.
    """
    if is_extended_array(u0.values):
        umax = float(max(abs(v) for v in u0.values))
    else:
        umax = float(np.abs(u0.values).max())
    if umax == 0.0:
        return DEFAULT_DT_CAP
    return min(DEFAULT_DT_CAP, CFL_SAFETY / (grid.n_modes * umax))


def snapshot_stride(dt: float, interval: float = DEFAULT_SNAPSHOT_INTERVAL) -> int:
    """Steps per snapshot for a target cadence in time units (at least 1)."""
    return max(1, round(interval / dt))


@dataclass(frozen=True)
class Trajectory:
    """Recorded snapshots of one run, initial state included."""

    config: BFamilyConfig
    times: tuple[float, ...]
    snapshots: tuple[Spectrum, ...]
    stop_reason: StopReason

    def __post_init__(self) -> None:
        if len(self.times) != len(self.snapshots):
            raise ValueError("times and snapshots must align")

    def __len__(self) -> int:
        return len(self.times)


def rk4_step(state: Spectrum, dt: float, options: RhsOptions) -> Spectrum:
    """One classical Runge-Kutta step of the full mode system."""
    c0 = state.coeffs
    grid = state.grid
    k1 = rhs(state, options).coeffs
    k2 = rhs(Spectrum(grid, c0 + (dt / 2) * k1), options).coeffs
    k3 = rhs(Spectrum(grid, c0 + (dt / 2) * k2), options).coeffs
    k4 = rhs(Spectrum(grid, c0 + dt * k3), options).coeffs
    return Spectrum(grid, c0 + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4))


StripMonitor = Callable[[float, Spectrum], Optional[float]]


def simulate(config: BFamilyConfig, strip_monitor: Optional[StripMonitor] = None) -> Trajectory:
    """Integrate from t = 0 to t_end, recording every sample_every steps.

    ``strip_monitor`` is an optional callback evaluated at snapshot
    times; it receives (t, spectrum) and may return a running
    analyticity-strip width estimate (or None when it cannot tell).
    When the estimate falls below the stop policy's threshold the run
    ends early with StopReason.RESOLUTION_LIMIT.  Physical-space
    overflow ends the run with StopReason.OVERFLOW and the trajectory
    holds everything recorded up to the last finite state.
    """
    with config.precision.context():
        u0 = initial_datum(config.initial, config.grid, config.precision)
        state = forward_transform(u0)
        opts = config.rhs_options
        dt = config.dt
        threshold = config.stop_policy.threshold(config.grid)

        n_full, remainder = _step_budget(config.t_end, dt)
        times = [0.0]
        snapshots = [state]
        stop = StopReason.REACHED_T_END
        step_index = 0
        t = 0.0

        def record_and_check(t_now: float, spec: Spectrum) -> bool:
            times.append(t_now)
            snapshots.append(spec)
            if strip_monitor is not None:
                width = strip_monitor(t_now, spec)
                if width is not None and width < threshold:
                    return True
            return False

        while step_index < n_full:
            step_index += 1
            t = step_index * dt
            try:
                state = rk4_step(state, dt, opts)
            except BlowUpOverflowError:
                stop = StopReason.OVERFLOW
                break
            if not all_finite(state.coeffs):
                stop = StopReason.OVERFLOW
                break
            is_last = step_index == n_full and remainder == 0.0
            if step_index % config.sample_every == 0 or is_last:
                if record_and_check(t, state):
                    stop = StopReason.RESOLUTION_LIMIT
                    break
        else:
            if remainder > 0.0:
                try:
                    state = rk4_step(state, remainder, opts)
                    if not all_finite(state.coeffs):
                        stop = StopReason.OVERFLOW
                    elif record_and_check(config.t_end, state):
                        stop = StopReason.RESOLUTION_LIMIT
                except BlowUpOverflowError:
                    stop = StopReason.OVERFLOW

        return Trajectory(
            config=config,
            times=tuple(times),
            snapshots=tuple(snapshots),
            stop_reason=stop,
        )


def _step_budget(t_end: float, dt: float) -> tuple[int, float]:
    """Number of full dt steps plus a final short remainder step."""
    n = int(math.floor(t_end / dt + 1e-9))
    remainder = t_end - n * dt
    if remainder <= 1e-9 * max(t_end, dt):
        remainder = 0.0
    return n, remainder
