"""Batch front end: simulate, track, sweep, and validate runs from manifests.

A manifest is a flat text file of ``key = value`` lines (``#`` starts a
comment).  Recognized keys and their defaults:

    b               = 3.0        family parameter
    modes           = 1024       grid resolution K
    dt              = 0.0001     time step
    t_end           = 1.0        integration horizon
    initial         = type1      type1 (sin x) or type2 (1 + sin x)
    dealias         = false      2/3-rule truncation of the products
    sample_every    = 25         steps between recorded snapshots
    fit_kmin        = none       lower fit-window edge (none: max(8, K/16))
    fit_kmax        = none       upper fit-window edge (none: noise floor)
    precision       = double     double or extended32
    min_strip_width = none       early-stop width (none: grid limit 2*pi/K)

Command-line flags mirror the keys and override the file.  Outputs are
CSV files whose ``#``-prefixed header repeats the schema version and the
full manifest, so a result file is its own provenance record; nothing
else (no timestamps) enters the files, and reruns of the same manifest
in double precision are bit-identical.

Exit codes: 0 success, 2 configuration error, 3 overflow before t_end,
4 insufficient data for the requested estimate.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import mpmath as mp
import numpy as np

from .core import GridSpec, inverse_transform
from .errors import (BFamilyError, ConfigError, GevreyOverflowError,
                     InsufficientDataError)
from .integrator import BFamilyConfig, StopPolicy, StopReason, Trajectory, simulate
from .precision import DOUBLE, EXTENDED32, Precision, to_float
from .spectral import derivative
from .synthetic import SyntheticSpec, oracle_spectrum
from .tracker import (FitOptions, TrackOptions, fit_spectrum, late_time_alpha,
                      strip_monitor, track)

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_OVERFLOW = 3
EXIT_INSUFFICIENT = 4

# Closure tolerances of the validate suite (absolute).
VALIDATE_DELTA_TOL = 1e-4
VALIDATE_ALPHA_TOL = 0.02
VALIDATE_X_STAR_TOL = 1e-4

_VALIDATE_DELTAS = (0.05, 0.1, 0.2, 0.35, 0.5)
_VALIDATE_ALPHAS = (1 / 3, 2 / 5, 1 / 2, 3 / 5, 2 / 3)


@dataclass(frozen=True)
class RunManifest:
    """One run's full configuration plus tracker options and output root."""

    config: BFamilyConfig
    fit: FitOptions
    out_dir: Path
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self) -> None:
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(
                f"manifest schema version {self.schema_version} does not match "
                f"this build's version {SCHEMA_VERSION}"
            )


def _parse_bool(raw: str, key: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"{key} must be a boolean, got {raw!r}")


def _parse_float(raw: str, key: str) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{key} must be a number, got {raw!r}") from exc


def _parse_int(raw: str, key: str) -> int:
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{key} must be an integer, got {raw!r}") from exc


def _parse_optional(raw: str, key: str, parser):
    if raw.strip().lower() in ("none", ""):
        return None
    return parser(raw, key)


_MANIFEST_DEFAULTS = {
    "b": "3.0",
    "modes": "1024",
    "dt": "0.0001",
    "t_end": "1.0",
    "initial": "type1",
    "dealias": "false",
    "sample_every": "25",
    "fit_kmin": "none",
    "fit_kmax": "none",
    "precision": "double",
    "min_strip_width": "none",
}


def parse_manifest_text(text: str) -> dict:
    """Flat ``key = value`` lines to a string map; unknown keys rejected."""
    entries = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"manifest line {lineno} is not 'key = value': {line!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in _MANIFEST_DEFAULTS:
            raise ConfigError(f"manifest line {lineno}: unknown key {key!r}")
        entries[key] = value
    return entries


def _precision_from_name(raw: str) -> Precision:
    lowered = raw.strip().lower()
    if lowered == "double":
        return DOUBLE
    if lowered == "extended32":
        return EXTENDED32
    raise ConfigError(f"precision must be 'double' or 'extended32', got {raw!r}")


def build_manifest(entries: dict, out_dir: Path) -> RunManifest:
    """Materialize a RunManifest from string entries (defaults filled in)."""
    merged = dict(_MANIFEST_DEFAULTS)
    merged.update(entries)
    initial = merged["initial"].strip()
    if initial not in ("type1", "type2"):
        raise ConfigError(f"initial must be 'type1' or 'type2', got {initial!r}")
    config = BFamilyConfig(
        b=_parse_float(merged["b"], "b"),
        grid=GridSpec(_parse_int(merged["modes"], "modes")),
        dt=_parse_float(merged["dt"], "dt"),
        t_end=_parse_float(merged["t_end"], "t_end"),
        initial=initial,
        dealias=_parse_bool(merged["dealias"], "dealias"),
        sample_every=_parse_int(merged["sample_every"], "sample_every"),
        stop_policy=StopPolicy(
            min_strip_width=_parse_optional(
                merged["min_strip_width"], "min_strip_width", _parse_float
            )
        ),
        precision=_precision_from_name(merged["precision"]),
    )
    fit = FitOptions(
        k_min=_parse_optional(merged["fit_kmin"], "fit_kmin", _parse_int),
        k_max=_parse_optional(merged["fit_kmax"], "fit_kmax", _parse_int),
    )
    return RunManifest(config=config, fit=fit, out_dir=out_dir)


def manifest_entries(manifest: RunManifest) -> dict:
    """The manifest back as plain strings, for provenance headers."""
    config = manifest.config
    return {
        "b": repr(config.b),
        "modes": str(config.grid.n_modes),
        "dt": repr(config.dt),
        "t_end": repr(config.t_end),
        "initial": str(config.initial),
        "dealias": "true" if config.dealias else "false",
        "sample_every": str(config.sample_every),
        "fit_kmin": "none" if manifest.fit.k_min is None else str(manifest.fit.k_min),
        "fit_kmax": "none" if manifest.fit.k_max is None else str(manifest.fit.k_max),
        "precision": "double" if config.precision.is_double else "extended32",
        "min_strip_width": (
            "none"
            if config.stop_policy.min_strip_width is None
            else repr(config.stop_policy.min_strip_width)
        ),
    }


def _value_formatter(precision: Precision):
    digits = 17 if precision.is_double else precision.digits + 2

    def fmt(value) -> str:
        if value is None:
            return ""
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        if isinstance(value, (mp.mpf, mp.mpc)):
            return mp.nstr(value, digits)
        return repr(float(value))

    return fmt


def write_csv(path: Path, provenance: dict, columns: Sequence[str], rows, fmt) -> None:
    lines = [f"# schema_version = {SCHEMA_VERSION}"]
    lines.extend(f"# {key} = {value}" for key, value in provenance.items())
    lines.append(",".join(columns))
    lines.extend(",".join(fmt(cell) for cell in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _write_summary(path: Path, provenance: dict, facts: dict) -> None:
    lines = [f"schema_version = {SCHEMA_VERSION}"]
    lines.extend(f"{key} = {value}" for key, value in provenance.items())
    lines.extend(f"{key} = {value}" for key, value in facts.items())
    path.write_text("\n".join(lines) + "\n")


_PLOT_SCRIPT = """\
#!/usr/bin/env python3
\"\"\"Plot the CSV outputs sitting next to this script (needs matplotlib).\"\"\"

import csv
from pathlib import Path

import matplotlib.pyplot as plt


def read_table(path):
    rows = [r for r in csv.reader(path.open()) if r and not r[0].startswith("#")]
    header, data = rows[0], rows[1:]
    return {
        name: [float(r[i]) if r[i] else None for r in data]
        for i, name in enumerate(header)
    }


here = Path(__file__).resolve().parent
singularity = here / "singularity.csv"
sweep = here / "sweep.csv"

if singularity.exists():
    table = read_table(singularity)
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    axes[0].plot(table["t"], table["delta"])
    axes[0].set_xlabel("t")
    axes[0].set_ylabel("strip width delta")
    axes[1].plot(table["t"], table["alpha"])
    axes[1].set_xlabel("t")
    axes[1].set_ylabel("algebraic character alpha")
    fig.tight_layout()
    fig.savefig(here / "singularity.png", dpi=150)

if sweep.exists():
    table = read_table(sweep)
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    pairs = [(b, t) for b, t in zip(table["b"], table["t_s"]) if t is not None]
    if pairs:
        axes[0].plot([p[0] for p in pairs], [p[1] for p in pairs], marker="o")
    axes[0].set_xlabel("b")
    axes[0].set_ylabel("blow-up time t_s")
    pairs = [(b, a) for b, a in zip(table["b"], table["alpha"]) if a is not None]
    if pairs:
        axes[1].plot([p[0] for p in pairs], [p[1] for p in pairs], marker="o")
    axes[1].set_xlabel("b")
    axes[1].set_ylabel("late-time alpha")
    fig.tight_layout()
    fig.savefig(here / "sweep.png", dpi=150)
"""


def _run_with_policy(manifest: RunManifest) -> Trajectory:
    """Simulate; the width monitor is attached whenever it can matter."""
    return simulate(manifest.config, strip_monitor=strip_monitor(manifest.fit))


def cmd_simulate(manifest: RunManifest) -> int:
    config = manifest.config
    monitor = None
    if config.stop_policy.min_strip_width is not None:
        monitor = strip_monitor(manifest.fit)
    trajectory = simulate(config, strip_monitor=monitor)
    provenance = manifest_entries(manifest)
    fmt = _value_formatter(config.precision)

    out = manifest.out_dir
    (out / "spectra").mkdir(parents=True, exist_ok=True)
    (out / "fields").mkdir(parents=True, exist_ok=True)
    wavenumbers = config.grid.wavenumbers()
    x = config.grid.nodes(config.precision)
    for index, (t, snapshot) in enumerate(zip(trajectory.times, trajectory.snapshots)):
        stamp = dict(provenance, t=fmt(t))
        write_csv(
            out / "spectra" / f"spectrum_{index:04d}.csv",
            stamp,
            ("k", "re", "im"),
            (
                (int(k), _re(c), _im(c))
                for k, c in zip(wavenumbers, snapshot.coeffs)
            ),
            fmt,
        )
        u = inverse_transform(snapshot).values
        ux = inverse_transform(derivative(snapshot)).values
        write_csv(
            out / "fields" / f"field_{index:04d}.csv",
            stamp,
            ("x", "u", "ux"),
            zip(x, u, ux),
            fmt,
        )
    _write_summary(
        out / "summary.txt",
        provenance,
        {
            "stop_reason": trajectory.stop_reason.value,
            "snapshots": len(trajectory),
            "final_time": fmt(trajectory.times[-1]),
        },
    )
    if trajectory.stop_reason is StopReason.OVERFLOW:
        print("overflow before t_end; partial trajectory written", file=sys.stderr)
        return EXIT_OVERFLOW
    return EXIT_OK


def _re(c):
    return mp.re(c) if isinstance(c, (mp.mpf, mp.mpc)) else c.real


def _im(c):
    return mp.im(c) if isinstance(c, (mp.mpf, mp.mpc)) else c.imag


def cmd_track(manifest: RunManifest) -> int:
    config = manifest.config
    trajectory = _run_with_policy(manifest)
    trace = track(trajectory, TrackOptions(fit=manifest.fit))
    provenance = manifest_entries(manifest)
    fmt = _value_formatter(config.precision)

    out = manifest.out_dir
    out.mkdir(parents=True, exist_ok=True)
    write_csv(
        out / "singularity.csv",
        provenance,
        ("t", "delta", "alpha", "x_star", "residual"),
        (
            (t, f.delta, f.alpha, f.x_star, f.residual)
            for t, f in zip(trace.times, trace.fits)
        ),
        fmt,
    )
    half = config.grid.n_modes // 2
    write_csv(
        out / "magnitudes.csv",
        provenance,
        ("t", "k", "magnitude"),
        (
            (t, k, abs(snapshot.coeffs[k]))
            for t, snapshot in zip(trajectory.times, trajectory.snapshots)
            for k in range(half)
        ),
        fmt,
    )
    alpha_late = late_time_alpha(trace)
    _write_summary(
        out / "summary.txt",
        provenance,
        {
            "stop_reason": trajectory.stop_reason.value,
            "snapshots": len(trajectory),
            "fitted_snapshots": len(trace.fits),
            "t_s": fmt(trace.t_s_estimate),
            "t_s_stderr": fmt(trace.t_s_stderr),
            "late_time_alpha": fmt(alpha_late),
        },
    )
    (out / "plot.py").write_text(_PLOT_SCRIPT)
    if trace.t_s_estimate is None:
        print("no significant strip-width decay; t_s not estimated")
    else:
        print(
            f"t_s = {trace.t_s_estimate:.6f} +- {trace.t_s_stderr:.6f}, "
            f"late-time alpha = {alpha_late:.4f}"
        )
    if trajectory.stop_reason is StopReason.OVERFLOW:
        print("overflow before t_end; partial trace written", file=sys.stderr)
        return EXIT_OVERFLOW
    return EXIT_OK


def _sweep_entry(task: tuple) -> tuple:
    """One sweep worker: returns (b, t_s, t_s_stderr, late alpha)."""
    manifest, b = task
    config = replace(manifest.config, b=b)
    trajectory = simulate(config, strip_monitor=strip_monitor(manifest.fit))
    try:
        trace = track(trajectory, TrackOptions(fit=manifest.fit))
    except InsufficientDataError:
        return (b, None, None, None)
    try:
        alpha = late_time_alpha(trace)
    except InsufficientDataError:
        alpha = None
    return (b, trace.t_s_estimate, trace.t_s_stderr, alpha)


def run_sweep(
    manifest: RunManifest, b_values: Sequence[float], max_workers: Optional[int] = None
) -> list:
    """Run one tracked simulation per b (worker pool), rows sorted by b."""
    tasks = [(manifest, float(b)) for b in b_values]
    if len(tasks) == 1:
        rows = [_sweep_entry(tasks[0])]
    else:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(_sweep_entry, tasks))
    return sorted(rows, key=lambda row: row[0])


def check_sweep_range(b_values: Sequence[float], allow_b_minus_one: bool) -> None:
    for b in b_values:
        if b < -1.0:
            raise ConfigError(
                f"b = {b} is outside the supported range (b > -1); "
                "behavior below -1 is not characterized"
            )
        if b == -1.0 and not allow_b_minus_one:
            raise ConfigError(
                "b = -1 admits globally analytic traveling waves with no "
                "finite blow-up; pass --allow-b-minus-one to sweep it anyway"
            )


def cmd_sweep(
    manifest: RunManifest,
    b_values: Sequence[float],
    allow_b_minus_one: bool = False,
    max_workers: Optional[int] = None,
) -> int:
    if not b_values:
        raise ConfigError("sweep needs at least one b value")
    check_sweep_range(b_values, allow_b_minus_one)
    rows = run_sweep(manifest, b_values, max_workers=max_workers)
    provenance = manifest_entries(manifest)
    fmt = _value_formatter(manifest.config.precision)
    out = manifest.out_dir
    out.mkdir(parents=True, exist_ok=True)
    write_csv(
        out / "sweep.csv", provenance, ("b", "t_s", "t_s_stderr", "alpha"), rows, fmt
    )
    (out / "plot.py").write_text(_PLOT_SCRIPT)
    for b, t_s, _, alpha in rows:
        t_text = "none" if t_s is None else f"{t_s:.6f}"
        a_text = "none" if alpha is None else f"{alpha:.4f}"
        print(f"b = {b}: t_s = {t_text}, late-time alpha = {a_text}")
    return EXIT_OK


def validate_cases(
    n_modes: int = 2048,
    deltas: Sequence[float] = _VALIDATE_DELTAS,
    alphas: Sequence[float] = _VALIDATE_ALPHAS,
    x_star: float = 0.7,
    fit: Optional[FitOptions] = None,
) -> list:
    """Closure suite rows: (delta, alpha, status, detail)."""
    grid = GridSpec(n_modes)
    if fit is None:
        fit = FitOptions(k_min=16)
    rows = []
    for delta in deltas:
        for alpha in alphas:
            if delta < grid.resolution_limit:
                rows.append((delta, alpha, "SKIP", "delta below the grid limit"))
                continue
            spec = SyntheticSpec(alpha=alpha, delta=delta, x_star=x_star)
            spectrum = oracle_spectrum(spec, grid)
            try:
                result = fit_spectrum(spectrum, fit)
            except BFamilyError as exc:
                rows.append((delta, alpha, "FAIL", type(exc).__name__))
                continue
            misses = []
            d_err = abs(to_float(result.delta) - delta)
            a_err = abs(to_float(result.alpha) - alpha)
            x_err = abs(to_float(result.x_star) - x_star)
            if d_err > VALIDATE_DELTA_TOL:
                misses.append(f"delta off by {d_err:.2e}")
            if a_err > VALIDATE_ALPHA_TOL:
                misses.append(f"alpha off by {a_err:.2e}")
            if x_err > VALIDATE_X_STAR_TOL:
                misses.append(f"x_star off by {x_err:.2e}")
            if misses:
                rows.append((delta, alpha, "FAIL", "; ".join(misses)))
            else:
                rows.append((delta, alpha, "PASS", ""))
    return rows


def cmd_validate(n_modes: int, fit_kmin: Optional[int]) -> int:
    fit = FitOptions(k_min=16 if fit_kmin is None else fit_kmin)
    rows = validate_cases(n_modes=n_modes, fit=fit)
    counts = {"PASS": 0, "FAIL": 0, "SKIP": 0}
    for delta, alpha, status, detail in rows:
        counts[status] += 1
        tail = f"  ({detail})" if detail else ""
        print(f"delta = {delta:<5} alpha = {alpha:.4f}  {status}{tail}")
    print(
        f"validate: {counts['PASS']} pass, {counts['FAIL']} fail, "
        f"{counts['SKIP']} skip"
    )
    return EXIT_OK if counts["FAIL"] == 0 else 1


def _add_manifest_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--manifest", type=Path, help="manifest file to load")
    parser.add_argument("--out", type=Path, help="output directory")
    for key in _MANIFEST_DEFAULTS:
        flag = "--" + key.replace("_", "-")
        parser.add_argument(flag, dest=f"key_{key}", metavar="VALUE")


def _manifest_from_args(args, default_out: str) -> RunManifest:
    entries = {}
    if args.manifest is not None:
        try:
            text = args.manifest.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read manifest: {exc}") from exc
        entries.update(parse_manifest_text(text))
    for key in _MANIFEST_DEFAULTS:
        override = getattr(args, f"key_{key}")
        if override is not None:
            entries[key] = override
    out_dir = args.out if args.out is not None else Path(default_out)
    return build_manifest(entries, out_dir)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="bfamily",
        description="b-family pseudospectral runs with singularity tracking",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="integrate and store snapshots")
    _add_manifest_flags(p_sim)

    p_track = sub.add_parser("track", help="integrate and track the singularity")
    _add_manifest_flags(p_track)

    p_sweep = sub.add_parser("sweep", help="tracked runs across b values")
    _add_manifest_flags(p_sweep)
    p_sweep.add_argument(
        "--b-list",
        required=True,
        help="comma-separated b values, e.g. 0,1,2,3,4",
    )
    p_sweep.add_argument(
        "--allow-b-minus-one",
        action="store_true",
        help="permit exactly b = -1 (globally analytic; no finite t_s)",
    )
    p_sweep.add_argument("--workers", type=int, default=None)

    p_val = sub.add_parser("validate", help="oracle-closure check of the tracker")
    p_val.add_argument("--modes", type=int, default=2048)
    p_val.add_argument("--fit-kmin", type=int, default=None)

    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(_manifest_from_args(args, "runs/simulate"))
        if args.command == "track":
            return cmd_track(_manifest_from_args(args, "runs/track"))
        if args.command == "sweep":
            manifest = _manifest_from_args(args, "runs/sweep")
            try:
                b_values = [float(v) for v in args.b_list.split(",") if v.strip()]
            except ValueError as exc:
                raise ConfigError(f"bad --b-list: {args.b_list!r}") from exc
            return cmd_sweep(
                manifest,
                b_values,
                allow_b_minus_one=args.allow_b_minus_one,
                max_workers=args.workers,
            )
        if args.command == "validate":
            return cmd_validate(args.modes, args.fit_kmin)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GevreyOverflowError as exc:
        print(f"overflow: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    except InsufficientDataError as exc:
        print(f"insufficient data: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT


if __name__ == "__main__":
    sys.exit(main())
