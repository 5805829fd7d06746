"""Command-line front end: manifests, outputs, exit codes, closure suite."""

import dataclasses

import numpy as np
import pytest

import bfamily.cli as cli
from bfamily.cli import (RunManifest, build_manifest, main, manifest_entries,
                         parse_manifest_text, run_sweep, validate_cases)
from bfamily.errors import ConfigError
from bfamily.integrator import BFamilyConfig, simulate
from bfamily.tracker import FitOptions


def write_manifest(path, **overrides):
    entries = {
        "b": "3.0",
        "modes": "64",
        "dt": "0.001",
        "t_end": "0.05",
        "initial": "type1",
        "dealias": "true",
        "sample_every": "10",
    }
    entries.update({k: str(v) for k, v in overrides.items()})
    path.write_text("\n".join(f"{k} = {v}" for k, v in entries.items()) + "\n")
    return path


class TestManifestParsing:
    def test_comments_and_blank_lines_ignored(self):
        text = "# a comment\n\nb = 2.5   # trailing\nmodes = 128\n"
        assert parse_manifest_text(text) == {"b": "2.5", "modes": "128"}

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            parse_manifest_text("speed = 9\n")

    def test_missing_equals_rejected(self):
        with pytest.raises(ConfigError):
            parse_manifest_text("just some words\n")

    def test_defaults_fill_in(self, tmp_path):
        manifest = build_manifest({}, tmp_path)
        assert manifest.config.grid.n_modes == 1024
        assert manifest.config.dt == 1e-4
        assert manifest.config.initial == "type1"
        assert manifest.config.dealias is False
        assert manifest.fit.k_min is None

    def test_entries_round_trip(self, tmp_path):
        entries = {
            "b": "2.0",
            "modes": "256",
            "dt": "0.0005",
            "dealias": "true",
            "fit_kmin": "16",
            "min_strip_width": "0.01",
        }
        manifest = build_manifest(entries, tmp_path)
        echoed = manifest_entries(manifest)
        rebuilt = build_manifest(echoed, tmp_path)
        assert rebuilt.config == manifest.config
        assert rebuilt.fit == manifest.fit

    def test_bad_values_rejected(self, tmp_path):
        for entries in (
            {"dealias": "maybe"},
            {"precision": "quad"},
            {"initial": "type3"},
            {"modes": "many"},
            {"dt": "-0.1"},
        ):
            with pytest.raises(ConfigError):
                build_manifest(entries, tmp_path)

    def test_schema_version_pinned(self, tmp_path):
        manifest = build_manifest({}, tmp_path)
        with pytest.raises(ConfigError):
            RunManifest(
                config=manifest.config,
                fit=manifest.fit,
                out_dir=tmp_path,
                schema_version=99,
            )


class TestSimulateCommand:
    def test_small_run_outputs(self, tmp_path):
        manifest = write_manifest(tmp_path / "m.txt")
        out = tmp_path / "out"
        code = main(["simulate", "--manifest", str(manifest), "--out", str(out)])
        assert code == 0
        assert (out / "summary.txt").exists()
        spectra = sorted((out / "spectra").iterdir())
        fields = sorted((out / "fields").iterdir())
        assert len(spectra) == len(fields) == 6
        header = spectra[0].read_text().splitlines()
        assert header[0] == "# schema_version = 1"
        assert "# modes = 64" in header

    def test_spectrum_csv_round_trips_exactly(self, tmp_path):
        manifest = write_manifest(tmp_path / "m.txt")
        out = tmp_path / "out"
        main(["simulate", "--manifest", str(manifest), "--out", str(out)])
        config = BFamilyConfig(
            b=3.0,
            grid=cli.GridSpec(64),
            dt=0.001,
            t_end=0.05,
            initial="type1",
            dealias=True,
            sample_every=10,
        )
        trajectory = simulate(config)
        lines = (out / "spectra" / "spectrum_0003.csv").read_text().splitlines()
        rows = [line.split(",") for line in lines if not line.startswith("#")][1:]
        parsed = np.array([complex(float(re), float(im)) for _, re, im in rows])
        # repr round-trips doubles exactly, so the file equals the state
        assert np.array_equal(parsed, trajectory.snapshots[3].coeffs)

    def test_rerun_bit_identical(self, tmp_path):
        manifest = write_manifest(tmp_path / "m.txt")
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["simulate", "--manifest", str(manifest), "--out", str(out1)])
        main(["simulate", "--manifest", str(manifest), "--out", str(out2)])
        for name in ("summary.txt", "spectra/spectrum_0002.csv", "fields/field_0005.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_invalid_dt_exits_2(self, tmp_path):
        manifest = write_manifest(tmp_path / "m.txt", dt="-0.001")
        code = main(["simulate", "--manifest", str(manifest), "--out", str(tmp_path / "o")])
        assert code == 2

    def test_flag_overrides_file(self, tmp_path):
        manifest = write_manifest(tmp_path / "m.txt", dt="-0.001")
        out = tmp_path / "out"
        code = main(
            [
                "simulate",
                "--manifest",
                str(manifest),
                "--dt",
                "0.001",
                "--out",
                str(out),
            ]
        )
        assert code == 0

    def test_overflow_exits_3(self, tmp_path):
        # a step far past the advective stability budget overflows fast
        manifest = write_manifest(
            tmp_path / "m.txt", initial="type2", dealias="false", dt="0.5", t_end="10",
            sample_every="1",
        )
        code = main(["simulate", "--manifest", str(manifest), "--out", str(tmp_path / "o")])
        assert code == 3

    def test_missing_manifest_exits_2(self, tmp_path):
        code = main(["simulate", "--manifest", str(tmp_path / "nope.txt")])
        assert code == 2


class TestTrackCommand:
    def test_blowup_run_outputs(self, tmp_path):
        manifest = write_manifest(
            tmp_path / "m.txt",
            modes=256,
            dt="0.0005",
            t_end="0.6",
            sample_every=50,
            fit_kmin=16,
            fit_kmax=80,
        )
        out = tmp_path / "out"
        code = main(["track", "--manifest", str(manifest), "--out", str(out)])
        assert code == 0
        lines = (out / "singularity.csv").read_text().splitlines()
        header = [line for line in lines if not line.startswith("#")][0]
        assert header == "t,delta,alpha,x_star,residual"
        assert (out / "magnitudes.csv").exists()
        assert (out / "plot.py").exists()
        summary = dict(
            line.split(" = ", 1) for line in (out / "summary.txt").read_text().splitlines()
        )
        t_s = float(summary["t_s"])
        assert 0.6 < t_s < 0.9
        assert float(summary["late_time_alpha"]) > 0.0

    def test_no_decay_exits_4(self, tmp_path):
        # b = -1 stationary wave: every snapshot sits below the fit floor
        manifest = write_manifest(tmp_path / "m.txt", b="-1.0", dealias="false")
        code = main(["track", "--manifest", str(manifest), "--out", str(tmp_path / "o")])
        assert code == 4


class TestSweepCommand:
    def sweep_manifest(self, tmp_path):
        return write_manifest(
            tmp_path / "m.txt",
            modes=128,
            dt="0.001",
            t_end="0.4",
            sample_every=40,
            fit_kmin=10,
            fit_kmax=40,
        )

    def test_rows_sorted_and_written(self, tmp_path):
        manifest = self.sweep_manifest(tmp_path)
        out = tmp_path / "out"
        code = main(
            [
                "sweep",
                "--manifest",
                str(manifest),
                "--out",
                str(out),
                "--b-list",
                "3,2",
            ]
        )
        assert code == 0
        lines = (out / "sweep.csv").read_text().splitlines()
        rows = [line for line in lines if not line.startswith("#")]
        assert rows[0] == "b,t_s,t_s_stderr,alpha"
        assert rows[1].startswith("2.0,") and rows[2].startswith("3.0,")
        t_s_b2 = float(rows[1].split(",")[1])
        assert 0.4 < t_s_b2 < 0.9

    def test_below_minus_one_rejected(self, tmp_path):
        manifest = self.sweep_manifest(tmp_path)
        code = main(
            ["sweep", "--manifest", str(manifest), "--out", str(tmp_path / "o"),
             "--b-list=-2,2"]
        )
        assert code == 2

    def test_minus_one_needs_override(self, tmp_path):
        manifest = self.sweep_manifest(tmp_path)
        args = ["sweep", "--manifest", str(manifest), "--out", str(tmp_path / "o"),
                "--b-list=-1"]
        assert main(args) == 2

    def test_minus_one_override_gives_empty_row(self, tmp_path):
        manifest = write_manifest(
            tmp_path / "m.txt", modes=64, dt="0.001", t_end="0.05", sample_every=10,
            dealias="false",
        )
        out = tmp_path / "out"
        code = main(
            ["sweep", "--manifest", str(manifest), "--out", str(out),
             "--b-list=-1", "--allow-b-minus-one"]
        )
        assert code == 0
        rows = [
            line
            for line in (out / "sweep.csv").read_text().splitlines()
            if not line.startswith("#")
        ]
        assert rows[1] == "-1.0,,,"

    def test_run_sweep_importable(self, tmp_path):
        manifest = build_manifest(
            {
                "modes": "128",
                "dt": "0.001",
                "t_end": "0.4",
                "sample_every": "40",
                "dealias": "true",
                "fit_kmin": "10",
                "fit_kmax": "40",
            },
            tmp_path,
        )
        rows = run_sweep(manifest, [3.0, 2.0], max_workers=2)
        assert [row[0] for row in rows] == [2.0, 3.0]
        assert all(row[1] is not None for row in rows)


class TestValidateCommand:
    def test_default_style_cases_pass(self):
        rows = validate_cases(
            n_modes=512,
            deltas=(0.2,),
            alphas=(1 / 3, 3 / 5),
            fit=FitOptions(k_min=16),
        )
        assert [row[2] for row in rows] == ["PASS", "PASS"]

    def test_unresolvable_delta_skipped(self):
        rows = validate_cases(n_modes=64, deltas=(0.05,), alphas=(1 / 3,))
        assert rows[0][2] == "SKIP"

    def test_wrong_exponent_convention_fails_with_diagnostic(self, monkeypatch):
        # report s itself instead of s - 1: the suite must catch it
        real_fit = cli.fit_spectrum

        def shifted(spectrum, options):
            result = real_fit(spectrum, options)
            return dataclasses.replace(result, alpha=result.alpha + 1.0)

        monkeypatch.setattr(cli, "fit_spectrum", shifted)
        rows = validate_cases(
            n_modes=512, deltas=(0.2,), alphas=(1 / 3,), fit=FitOptions(k_min=16)
        )
        assert rows[0][2] == "FAIL"
        assert "alpha off by" in rows[0][3]

    def test_exit_codes_through_main(self, capsys):
        assert main(["validate", "--modes", "512", "--fit-kmin", "16"]) == 0
        out = capsys.readouterr().out
        assert "pass" in out and "0 fail" in out
