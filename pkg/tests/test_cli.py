"""Command line driver: parsing, precedence, artifacts, exit codes."""

import math
import os
import subprocess
import sys

import pytest

from conefrac.cli import main


def run_cli(tmp_path, *argv):
    """Run the driver in process, returning (exit code, outdir)."""
    out = tmp_path / "out"
    code = main([*argv, "--out", str(out)])
    return code, out


def read_csv(path):
    """Parse one artifact into (header, rows of strings, trailer)."""
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    trailer = lines[-1]
    rows = [ln.split(",") for ln in lines[1:-1]]
    return header, rows, trailer


class TestParsing:
    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0
        assert "usage:" in capsys.readouterr().out

    def test_unknown_subcommand(self):
        assert main(["nosuch", "--s", "0.5"]) == 2

    def test_missing_required_key(self, tmp_path):
        code, _ = run_cli(tmp_path, "calpha", "--s", "0.5")
        assert code == 2

    def test_flag_without_value(self):
        assert main(["calpha", "--s"]) == 2

    def test_unknown_key_rejected(self, tmp_path):
        code, _ = run_cli(tmp_path, "calpha", "--s", "0.5",
                          "--alpha", "0.25", "--bogus", "1")
        assert code == 2

    def test_key_equals_value_form(self, tmp_path):
        code, out = run_cli(tmp_path, "calpha", "--s=0.5", "--alpha=0.25")
        assert code == 0
        assert (out / "calpha.csv").exists()


class TestCalphaArtifact:
    def test_closed_value_and_trailer(self, tmp_path):
        code, out = run_cli(tmp_path, "calpha", "--s", "0.5",
                            "--alpha", "0.25")
        assert code == 0
        header, rows, trailer = read_csv(out / "calpha.csv")
        assert header == ["alpha", "s", "c_alpha", "err"]
        assert len(rows) == 1
        assert float(rows[0][2]) == pytest.approx(-math.pi / 4.0, rel=1e-10)
        assert trailer.startswith("# seed=20220 version=")

    def test_vanishes_at_alpha_equal_s(self, tmp_path):
        code, out = run_cli(tmp_path, "calpha", "--s", "0.5",
                            "--alpha", "0.5")
        assert code == 0
        _, rows, _ = read_csv(out / "calpha.csv")
        assert abs(float(rows[0][2])) <= 1e-8

    def test_alpha_list_gives_one_row_each(self, tmp_path):
        code, out = run_cli(tmp_path, "calpha", "--s", "0.5",
                            "--alpha", "0.1,0.25,0.4")
        assert code == 0
        _, rows, _ = read_csv(out / "calpha.csv")
        assert [float(r[0]) for r in rows] == [0.1, 0.25, 0.4]


class TestEvalArtifact:
    def test_halfspace_power_closed_path(self, tmp_path):
        code, out = run_cli(tmp_path, "eval", "--s", "0.5",
                            "--x", "0.3,1.0",
                            "--function.kind", "halfspace_power",
                            "--function.alpha", "0.25")
        assert code == 0
        header, rows, _ = read_csv(out / "eval.csv")
        assert header == ["x1", "x2", "value", "err", "path"]
        assert rows[0][4] == "closed_form"
        # c_{1/4} * moment = (-pi/4) * 4 at x_N = 1
        assert float(rows[0][2]) == pytest.approx(-math.pi, rel=1e-9)


class TestIdentitySubcommand:
    def test_scaling_residual_within_budget(self, tmp_path):
        code, out = run_cli(tmp_path, "identity", "--s", "0.5",
                            "--check", "scaling",
                            "--function.kind", "bump",
                            "--x", "0.2,1.1")
        assert code == 0
        _, rows, _ = read_csv(out / "identity.csv")
        assert len(rows) == 1
        residual, budget = float(rows[0][3]), float(rows[0][4])
        assert residual <= budget + 1e-8

    def test_loosened_quadrature_default_recorded(self, tmp_path):
        code, out = run_cli(tmp_path, "identity", "--s", "0.5",
                            "--check", "scaling",
                            "--function.kind", "bump",
                            "--x", "0.2,1.1")
        assert code == 0
        resolved = (out / "resolved.cfg").read_text()
        assert "quad.abs_tol = 1e-05" in resolved
        assert "quad.rel_tol = 1e-04" in resolved

    def test_strict_budget_failure_exits_four(self, tmp_path):
        # the decaying-power comparison cannot meet the tight default
        # target, so forcing it back on must surface the accuracy error
        code, _ = run_cli(tmp_path, "identity", "--s", "0.5",
                          "--check", "kelvin",
                          "--function.kind", "kelvin",
                          "--x", "0.3,1.0",
                          "--quad.abs_tol", "1e-8",
                          "--quad.rel_tol", "1e-7")
        assert code == 4


class TestPairSubcommand:
    def test_default_disjoint_bumps(self, tmp_path):
        code, out = run_cli(tmp_path, "pair", "--s", "0.5")
        assert code == 0
        header, rows, _ = read_csv(out / "pair.csv")
        assert header == ["I_uLv", "I_vLu", "residual"]
        assert float(rows[0][0]) == pytest.approx(2.1639319388712633e-02,
                                                  rel=1e-6)
        assert float(rows[0][2]) <= 1e-3 * abs(float(rows[0][0]))


class TestScanSubcommand:
    def test_coherent_expectation_passes(self, tmp_path):
        code, out = run_cli(tmp_path, "scan", "--s", "0.5",
                            "--p", "1.2,1.8", "--expect", "coherent")
        assert code == 0
        _, rows, _ = read_csv(out / "scan.csv")
        assert [r[-1] for r in rows] == ["false", "true"]
        assert float(rows[0][1]) == pytest.approx(5.0 / 3.0, rel=1e-12)

    def test_column_expectation_failure_exits_three(self, tmp_path):
        code, _ = run_cli(tmp_path, "scan", "--s", "0.5",
                          "--p", "1.8", "--expect", "certified=false")
        assert code == 3


class TestPrecedence:
    def test_config_file_overrides_default(self, tmp_path):
        cfgfile = tmp_path / "mine.cfg"
        cfgfile.write_text("quad.mc_seed = 555\n")
        code, out = run_cli(tmp_path, "calpha", "--s", "0.5",
                            "--alpha", "0.25", "--config", str(cfgfile))
        assert code == 0
        assert "quad.mc_seed = 555" in (out / "resolved.cfg").read_text()
        _, _, trailer = read_csv(out / "calpha.csv")
        assert trailer.startswith("# seed=555 ")

    def test_environment_overrides_file(self, tmp_path, monkeypatch):
        cfgfile = tmp_path / "mine.cfg"
        cfgfile.write_text("quad.mc_seed = 555\n")
        monkeypatch.setenv("CONEFRAC_QUAD__MC_SEED", "999")
        code, out = run_cli(tmp_path, "calpha", "--s", "0.5",
                            "--alpha", "0.25", "--config", str(cfgfile))
        assert code == 0
        assert "quad.mc_seed = 999" in (out / "resolved.cfg").read_text()

    def test_flag_overrides_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv("CONEFRAC_QUAD__MC_SEED", "999")
        code, out = run_cli(tmp_path, "calpha", "--s", "0.5",
                            "--alpha", "0.25", "--quad.mc_seed", "111")
        assert code == 0
        assert "quad.mc_seed = 111" in (out / "resolved.cfg").read_text()

    def test_malformed_config_line(self, tmp_path):
        cfgfile = tmp_path / "bad.cfg"
        cfgfile.write_text("quad.mc_seed 555\n")
        code, _ = run_cli(tmp_path, "calpha", "--s", "0.5",
                          "--alpha", "0.25", "--config", str(cfgfile))
        assert code == 2

    def test_subcommand_mismatch_rejected(self, tmp_path):
        code, out = run_cli(tmp_path, "calpha", "--s", "0.5",
                            "--alpha", "0.25")
        assert code == 0
        code2 = main(["moment", "--config", str(out / "resolved.cfg"),
                      "--out", str(tmp_path / "out2")])
        assert code2 == 2


class TestDeterminism:
    def test_rerun_from_resolved_config(self, tmp_path):
        code, out = run_cli(tmp_path, "moment", "--s", "0.5",
                            "--density.kind", "cone_plateau")
        assert code == 0
        out2 = tmp_path / "out2"
        assert main(["moment", "--config", str(out / "resolved.cfg"),
                     "--out", str(out2)]) == 0
        assert (out / "moment.csv").read_bytes() \
            == (out2 / "moment.csv").read_bytes()


class TestSvgOutput:
    def test_written_only_on_request(self, tmp_path):
        code, out = run_cli(tmp_path, "calpha", "--s", "0.5",
                            "--alpha", "0.1,0.25,0.4", "--svg", "true")
        assert code == 0
        text = (out / "calpha.svg").read_text()
        assert text.lstrip().startswith("<svg")
        assert "</svg>" in text
        code, out2 = run_cli(tmp_path / "b", "calpha", "--s", "0.5",
                             "--alpha", "0.25")
        assert code == 0
        assert not (out2 / "calpha.svg").exists()


class TestDegenerateInputs:
    def test_vanishing_density_rejected(self, tmp_path):
        code, _ = run_cli(tmp_path, "moment", "--s", "0.5",
                          "--density.value", "0")
        assert code == 2

    def test_subthreshold_construct_rejected(self, tmp_path):
        code, _ = run_cli(tmp_path, "construct", "--s", "0.5", "--p", "1.5")
        assert code == 2


def test_module_entry_point(tmp_path):
    out = tmp_path / "out"
    proc = subprocess.run(
        [sys.executable, "-m", "conefrac", "calpha", "--s", "0.5",
         "--alpha", "0.25", "--out", str(out)],
        capture_output=True, text=True,
        env={**os.environ, "PYTHONPATH": ""})
    assert proc.returncode == 0
    assert (out / "calpha.csv").exists()
