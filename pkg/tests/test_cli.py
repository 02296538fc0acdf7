import json
import shutil
import subprocess

import pytest

from fracwave.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, EXIT_VALIDATION, main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


class TestSolve:
    def test_odd_wave(self, tmp_path, capsys):
        code, out, _ = run(["solve", "--family", "odd", "--alpha", "2", "--c", "0",
                            "--n-modes", "64", "--out", str(tmp_path)], capsys)
        assert code == EXIT_OK
        files = sorted(p.name for p in tmp_path.iterdir())
        assert files == ["wave_odd_alpha2_c0.json", "wave_odd_alpha2_c0.txt"]
        data = json.loads((tmp_path / files[0]).read_text())
        assert data["c"] == 0.0 and data["alpha"] == 2.0
        assert "wrote" in out

    def test_negative_speed(self, tmp_path, capsys):
        code, _, _ = run(["solve", "--family", "odd", "--alpha", "1", "--c", "-0.5",
                          "--n-modes", "64", "--out", str(tmp_path)], capsys)
        assert code == EXIT_OK

    def test_deterministic(self, tmp_path, capsys):
        outs = []
        for name in ("a", "b"):
            d = tmp_path / name
            assert run(["solve", "--family", "even", "--alpha", "1.5", "--c", "0.9",
                        "--n-modes", "64", "--out", str(d)], capsys)[0] == EXIT_OK
            outs.append((d / "wave_even_alpha1.5_c0.9.json").read_bytes())
        assert outs[0] == outs[1]


class TestBranch:
    def test_odd_with_negative_range(self, tmp_path, capsys):
        code, out, _ = run(["branch", "--family", "odd", "--alpha", "2", "--c-range", "-0.5:1.6",
                            "--n-modes", "64", "--out", str(tmp_path), "--plots"], capsys)
        assert code == EXIT_OK
        assert "pitchfork" in out
        names = {p.name for p in tmp_path.iterdir()}
        assert any(n.endswith(".csv") for n in names)
        assert any(n.endswith(".gp") for n in names)

    @pytest.mark.skipif(shutil.which("gnuplot") is None, reason="gnuplot not installed")
    def test_gnuplot_runs(self, tmp_path, capsys):
        run(["branch", "--family", "odd", "--alpha", "2", "--c-range", "-0.5:0.5",
             "--n-modes", "64", "--out", str(tmp_path), "--plots"], capsys)
        script = next(tmp_path.glob("*.gp"))
        subprocess.run(["gnuplot", script.name], cwd=tmp_path, check=True)


class TestAnalyze:
    def test_table(self, tmp_path, capsys):
        code, out, _ = run(["analyze", "--family", "odd", "--alpha", "2", "--c", "1.0,2.0",
                            "--n-modes", "128", "--out", str(tmp_path)], capsys)
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        assert "stable" in lines[1] and "unstable" in lines[2]
        rows = json.loads((tmp_path / "analysis_odd_alpha2.json").read_text())
        assert [r["verdict"]["verdict"] for r in rows] == ["stable", "unstable"]

    def test_constant_speed(self, tmp_path, capsys):
        code, out, _ = run(["analyze", "--family", "even", "--alpha", "2", "--c", "0.3",
                            "--n-modes", "64", "--out", str(tmp_path)], capsys)
        assert code == EXIT_OK and "constant wave" in out


class TestValidate:
    def test_elliptic(self, tmp_path, capsys):
        code, out, _ = run(["validate", "elliptic", "--k", "0.5", "--out", str(tmp_path)], capsys)
        assert code == EXIT_OK
        assert "FAIL" not in out

    def test_stokes_reports_even_order(self, tmp_path, capsys):
        # the even expansion leaves an A^4 residual, so its order check fails
        code, out, _ = run(["validate", "stokes", "--alpha", "2", "--out", str(tmp_path)], capsys)
        assert code == EXIT_VALIDATION
        assert "FAIL" in out

    def test_variational(self, tmp_path, capsys):
        code, _, _ = run(["validate", "variational", "--alpha", "2", "--c", "0.5",
                          "--n-modes", "64", "--out", str(tmp_path)], capsys)
        assert code == EXIT_OK


class TestExitCodes:
    @pytest.mark.parametrize("argv", [
        ["solve", "--family", "odd", "--alpha", "0.4", "--c", "0"],
        ["solve", "--family", "odd", "--alpha", "1", "--c", "nan"],
        ["solve", "--family", "odd", "--alpha", "1,2", "--c", "0"],
        ["solve", "--alpha", "1", "--c", "0"],
        ["branch", "--family", "odd", "--alpha", "1", "--c-range", "1:0"],
        ["solve", "--family", "odd", "--alpha", "1", "--c", "0", "--n-modes", "15"],
        ["validate", "elliptic", "--k", "1.5"],
        ["frobnicate"],
    ])
    def test_config_errors(self, argv, tmp_path, capsys):
        assert run(argv + ["--out", str(tmp_path)], capsys)[0] == EXIT_CONFIG

    def test_out_of_range_is_numeric(self, tmp_path, capsys):
        code, _, err = run(["solve", "--family", "odd", "--alpha", "1", "--c", "-1.5",
                            "--n-modes", "64", "--out", str(tmp_path)], capsys)
        assert code == EXIT_NUMERIC
        assert "ParameterOutOfRange" in err


class TestConfig:
    def test_file_and_override(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# wave run\nfamily = odd\nalpha = 2\nc = 0\nn-modes = 64\n")
        code, _, _ = run(["solve", "--config", str(cfg), "--c", "0.5",
                          "--out", str(tmp_path)], capsys)
        assert code == EXIT_OK
        assert (tmp_path / "wave_odd_alpha2_c0.5.json").exists()

    def test_bad_file(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("family odd\n")
        assert run(["solve", "--config", str(cfg)], capsys)[0] == EXIT_CONFIG

    def test_env_output_dir(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("FRACWAVE_OUT", str(tmp_path / "env"))
        code, _, _ = run(["solve", "--family", "odd", "--alpha", "2", "--c", "0",
                          "--n-modes", "64"], capsys)
        assert code == EXIT_OK
        assert (tmp_path / "env" / "wave_odd_alpha2_c0.json").exists()


def test_console_script_installed():
    exe = shutil.which("fracwave")
    if exe is None:
        pytest.skip("package not installed as a script")
    proc = subprocess.run([exe, "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "fracwave" in proc.stdout
