"""End-to-end CLI tests: subcommands, file formats, exit codes, config echo."""

import json

import numpy as np
import pytest

from torusneedlet import cli

REPORT_KEYS = {
    "N", "M_N", "S_N", "U_N", "var_S", "var_U1", "var_U2",
    "z_S", "z_U", "p_S", "p_U", "p_joint", "mode", "seed",
}


def run(*argv):
    return cli.main(list(argv))


class TestFrameCheck:
    def test_summary_mode(self, capsys):
        assert run("frame-check", "--j", "4") == 0
        out = capsys.readouterr().out
        assert "fitted_c" in out

    def test_csv_output_and_echo(self, tmp_path):
        out = tmp_path / "loc.csv"
        assert run("frame-check", "--j", "3", "--k-decay", "3", "--out", str(out)) == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("#")
        assert lines[1] == "x,abs_psi,bound"
        assert (tmp_path / "loc.csv.config.json").exists()

    def test_consistency_failure_exits_two(self, monkeypatch):
        monkeypatch.setattr(cli, "partition_of_unity", lambda xi: np.zeros_like(np.asarray(xi)))
        assert run("frame-check", "--j", "4") == 2


class TestSimulateCoeffsTest:
    def test_roundtrip_exact(self, tmp_path):
        fld = tmp_path / "field.csv"
        beta = tmp_path / "beta.csv"
        report = tmp_path / "report.json"
        assert run("simulate", "--alpha", "4", "--lmax", "128", "--seed", "9", "--out", str(fld)) == 0
        assert run("coeffs", "--in", str(fld), "--j", "4", "--mode", "exact", "--out", str(beta)) == 0
        lines = beta.read_text().splitlines()
        assert lines[1] == "k,beta"
        assert len(lines) == 2 + 2**6
        assert run("test", "--in", str(fld), "--j", "4", "--mode", "exact", "--report", str(report)) == 0
        payload = json.loads(report.read_text())
        assert set(payload) == REPORT_KEYS
        assert payload["N"] == 64
        assert payload["mode"] == "exact"
        assert payload["seed"] == 9
        assert abs(payload["M_N"]) < 1e-10

    def test_samples_pipeline(self, tmp_path):
        samples = tmp_path / "samples.csv"
        report = tmp_path / "report.json"
        assert run(
            "simulate", "--alpha", "4", "--lmax", "512", "--seed", "3",
            "--grid", "256", "--emit", "samples", "--out", str(samples),
        ) == 0
        assert run("test", "--samples", str(samples), "--j", "4", "--report", str(report)) == 0
        payload = json.loads(report.read_text())
        assert payload["mode"] == "studentized"
        assert 0 <= payload["p_joint"] <= 1

    def test_user_samples_without_metadata(self, tmp_path):
        samples = tmp_path / "user.csv"
        rng = np.random.default_rng(0)
        values = rng.standard_normal(256)
        samples.write_text("m,value\n" + "\n".join(f"{m},{v}" for m, v in enumerate(values)) + "\n")
        report = tmp_path / "report.json"
        assert run("test", "--samples", str(samples), "--j", "4", "--report", str(report)) == 0

    def test_grid_coeffs_from_samples(self, tmp_path):
        samples = tmp_path / "samples.csv"
        beta = tmp_path / "beta.csv"
        run(
            "simulate", "--alpha", "4", "--lmax", "64", "--seed", "3",
            "--grid", "256", "--emit", "samples", "--out", str(samples),
        )
        assert run("coeffs", "--in", str(samples), "--j", "4", "--mode", "grid", "--out", str(beta)) == 0

    def test_bare_coeffs_studentized(self, tmp_path):
        fld = tmp_path / "field.csv"
        beta = tmp_path / "beta.csv"
        r1 = tmp_path / "from_field.json"
        r2 = tmp_path / "from_beta.json"
        r3 = tmp_path / "from_bare_field.json"
        run("simulate", "--alpha", "4", "--lmax", "128", "--seed", "5", "--out", str(fld))
        run("coeffs", "--in", str(fld), "--j", "4", "--mode", "exact", "--out", str(beta))
        assert run("test", "--in", str(fld), "--j", "4", "--mode", "studentized", "--report", str(r1)) == 0
        assert run("test", "--in", str(beta), "--j", "4", "--report", str(r2)) == 0
        # same field with the spectrum metadata stripped: the data-only route
        bare = tmp_path / "bare.csv"
        bare.write_text("\n".join(l for l in fld.read_text().splitlines() if not l.startswith("#")) + "\n")
        assert run("test", "--in", str(bare), "--j", "4", "--mode", "studentized", "--report", str(r3)) == 0
        a, b, c = (json.loads(p.read_text()) for p in (r1, r2, r3))
        # the skewness z is normalization-invariant; the kurtosis z matches
        # between the two data-only routes
        assert b["z_S"] == pytest.approx(a["z_S"], rel=1e-9)
        assert b["z_S"] == pytest.approx(c["z_S"], rel=1e-9)
        assert b["z_U"] == pytest.approx(c["z_U"], rel=1e-9)
        assert b["var_U1"] == pytest.approx(a["var_U1"], rel=1e-9)

    def test_missing_input_names_path(self, tmp_path, caplog):
        report = tmp_path / "r.json"
        code = run("test", "--samples", str(tmp_path / "missing.csv"), "--j", "4", "--report", str(report))
        assert code == 1
        assert "missing.csv" in caplog.text

    def test_exact_mode_rejected_for_samples(self, tmp_path):
        samples = tmp_path / "samples.csv"
        run(
            "simulate", "--alpha", "4", "--lmax", "64", "--seed", "3",
            "--grid", "256", "--emit", "samples", "--out", str(samples),
        )
        code = run(
            "test", "--samples", str(samples), "--j", "4", "--mode", "exact",
            "--report", str(samples.with_suffix(".json")),
        )
        assert code == 1

    def test_samples_emit_requires_grid(self, tmp_path):
        code = run(
            "simulate", "--alpha", "4", "--lmax", "64", "--seed", "3",
            "--emit", "samples", "--out", str(tmp_path / "x.csv"),
        )
        assert code == 1


class TestMcAlias:
    def test_mc_outputs(self, tmp_path):
        out = tmp_path / "mc"
        assert run(
            "mc", "--alpha", "4", "--j", "4", "--reps", "8", "--seed", "1", "--out", str(out)
        ) == 0
        for name in ("zscores.csv", "hist_s.csv", "hist_u.csv", "diagnostics.json", "config.json"):
            assert (out / name).exists(), name
        zs = (out / "zscores.csv").read_text().splitlines()
        assert zs[0] == "rep,S_N,U_N,z_S,z_U"
        assert len(zs) == 9
        diag = json.loads((out / "diagnostics.json").read_text())
        assert set(diag) == {"z_S", "z_U"}
        cfg = json.loads((out / "config.json").read_text())
        assert cfg["seed"] == 1 and cfg["command"] == "mc"

    def test_mc_rerun_from_echoed_config(self, tmp_path):
        first = tmp_path / "first"
        second = tmp_path / "second"
        run("mc", "--alpha", "4", "--j", "4", "--reps", "6", "--seed", "3", "--out", str(first))
        code = run("--config", str(first / "config.json"), "mc", "--alpha", "4", "--j", "4",
                   "--reps", "6", "--seed", "3", "--out", str(second))
        assert code == 0
        assert (first / "zscores.csv").read_bytes() == (second / "zscores.csv").read_bytes()

    def test_config_file_defaults_and_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("alpha = 4\nreps = 5\nseed = 8\nj = 4\n")
        out = tmp_path / "mc"
        assert run("--config", str(cfg), "mc", "--seed", "9", "--out", str(out)) == 0
        resolved = json.loads((out / "config.json").read_text())
        assert resolved["reps"] == 5       # from the config file
        assert resolved["seed"] == 9       # flag wins over config
        zs = (out / "zscores.csv").read_text().splitlines()
        assert len(zs) == 6

    def test_alias_outputs(self, tmp_path):
        out = tmp_path / "alias"
        n = 2**6
        assert run(
            "alias", "--alpha", "4", "--j", "4", "--grids", f"{2*n},{4*n}",
            "--reps", "2", "--out", str(out),
        ) == 0
        lines = (out / "aliasing.csv").read_text().splitlines()
        assert lines[0] == "M,rel_error,fitted_exponent"
        assert len(lines) == 3

    def test_alias_bad_grids(self, tmp_path):
        code = run(
            "alias", "--alpha", "4", "--j", "4", "--grids", "abc",
            "--reps", "2", "--out", str(tmp_path / "x"),
        )
        assert code == 1

    def test_workers_flag_matches_serial(self, tmp_path):
        a, b = tmp_path / "w1", tmp_path / "w2"
        run("mc", "--alpha", "4", "--j", "4", "--reps", "6", "--seed", "4", "--out", str(a))
        run("mc", "--alpha", "4", "--j", "4", "--reps", "6", "--seed", "4",
            "--workers", "2", "--out", str(b))
        assert (a / "zscores.csv").read_bytes() == (b / "zscores.csv").read_bytes()


class TestSpectrumFlag:
    def test_cosine_and_file(self, tmp_path):
        gfile = tmp_path / "g.csv"
        gfile.write_text("l,value\n" + "\n".join(f"{l},1.0" for l in range(1, 65)) + "\n")
        out = tmp_path / "f.csv"
        assert run("simulate", "--alpha", "4", "--lmax", "64", "--seed", "1",
                   "--g", "cosine:2,1,0.5", "--out", str(out)) == 0
        assert run("simulate", "--alpha", "4", "--lmax", "64", "--seed", "1",
                   "--g", f"file:{gfile}", "--out", str(out)) == 0
        assert run("simulate", "--alpha", "4", "--lmax", "64", "--seed", "1",
                   "--g", "nope", "--out", str(out)) == 1
