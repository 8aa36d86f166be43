"""Command-line interface: subcommands, outputs and exit codes."""
import subprocess
import sys

import numpy as np
import pytest

from test_dynamics import random_state
from voigtmhd import cli, fileio
from voigtmhd import dynamics as dy
from voigtmhd import relax as rx

ABC = """
[grid]
n = 16
[physics]
alpha = 1.0
nu = 1.0
[init]
kind = "abc"
[time]
t_max = 10.0
"""

SHORT_RANDOM = """
[grid]
n = 8
[physics]
alpha = 1.0
nu = 1.0
[init]
kind = "random_solenoidal"
seed = 42
amplitude = 2.0
[time]
t_max = 0.3
"""


def write(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestRelax:
    def test_abc_converges(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = cli.cli_main(["relax", "--config", write(tmp_path, ABC), "--out", str(out)])
        assert code == cli.EXIT_OK
        text = capsys.readouterr().out
        assert "termination_reason: converged" in text
        assert (out / "diagnostics.csv").exists() and (out / "relaxation.png").exists()

    def test_t_max_exit(self, tmp_path):
        code = cli.cli_main(["relax", "--config", write(tmp_path, SHORT_RANDOM), "--no-figures"])
        assert code == cli.EXIT_T_MAX

    def test_simulate_exit_zero(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = cli.cli_main(["simulate", "--config", write(tmp_path, SHORT_RANDOM), "--out", str(out),
                             "--no-figures"])
        assert code == cli.EXIT_OK
        assert "termination_reason: t_max" in capsys.readouterr().out
        assert not (out / "relaxation.png").exists()

    def test_blowup_exit(self, tmp_path, monkeypatch):
        step = dy.rk4_step

        def inflate(s, dt):
            new = step(s, dt)
            return dy.VoigtState(new.u, new.B * 2.0, new.Psi, new.t, new.params)

        monkeypatch.setattr(dy, "rk4_step", inflate)
        assert cli.cli_main(["relax", "--config", write(tmp_path, SHORT_RANDOM)]) == cli.EXIT_FAILURE

    def test_resume(self, tmp_path):
        out = tmp_path / "out"
        cfg = write(tmp_path, SHORT_RANDOM)
        assert cli.cli_main(["simulate", "--config", cfg, "--out", str(out), "--no-figures"]) == 0
        longer = write(tmp_path, SHORT_RANDOM.replace("t_max = 0.3", "t_max = 0.6"), "longer.toml")
        code = cli.cli_main(["simulate", "--config", longer, "--out", str(out), "--no-figures",
                             "--resume", str(out / rx.FINAL_NAME)])
        assert code == 0
        assert fileio.read_diagnostics(out / rx.CSV_NAME)[-1].t == 0.6

    def test_invalid_config(self, tmp_path, capsys):
        bad = write(tmp_path, ABC.replace("alpha = 1.0", "alpha = 0.5"))
        assert cli.cli_main(["relax", "--config", bad]) == cli.EXIT_USAGE
        assert "alpha >= 1" in capsys.readouterr().err

    def test_missing_config(self, tmp_path):
        assert cli.cli_main(["relax", "--config", str(tmp_path / "none.toml")]) == cli.EXIT_USAGE

    def test_missing_resume_file(self, tmp_path):
        code = cli.cli_main(["relax", "--config", write(tmp_path, ABC), "--resume", str(tmp_path / "x")])
        assert code == cli.EXIT_USAGE


class TestDiagnose:
    def test_prints_row(self, tmp_path, grid8, capsys):
        path = tmp_path / "s.vmhs"
        fileio.save_checkpoint(random_state(grid8, 3), path)
        assert cli.cli_main(["diagnose", "--checkpoint", str(path)]) == cli.EXIT_OK
        header, row = capsys.readouterr().out.strip().splitlines()
        assert header == fileio.HEADER
        assert len(row.split(",")) == len(header.split(","))

    def test_missing_file(self, tmp_path):
        assert cli.cli_main(["diagnose", "--checkpoint", str(tmp_path / "nope.vmhs")]) == cli.EXIT_USAGE

    def test_corrupt_file(self, tmp_path):
        path = tmp_path / "bad.vmhs"
        path.write_bytes(b"VMHS" + b"\0" * 60)
        assert cli.cli_main(["diagnose", "--checkpoint", str(path)]) == cli.EXIT_USAGE


class TestGrowth:
    def test_reduced_fit(self, capsys):
        code = cli.cli_main(["growth", "--model", "reduced1d", "--n", "512", "--t-max", "5"])
        assert code == cli.EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "t,axis_gradient,global_gradient,aliased_flag"
        fit = lines[-1]
        rate = float(fit.split("rate=")[1].split()[0])
        assert fit.startswith("fit:") and abs(rate - 1.0) <= 0.03
        t, axis, _, flag = lines[1].split(",")
        assert float(t) == 0.0 and float(axis) == pytest.approx(1.0) and flag == "0"

    def test_writes_files(self, tmp_path, capsys):
        out = tmp_path / "g"
        code = cli.cli_main(["growth", "--n", "256", "--t-max", "2", "--out", str(out)])
        assert code == cli.EXIT_OK
        data = np.loadtxt(out / "growth.csv", delimiter=",", skiprows=1)
        assert data.shape[1] == 4 and data[-1, 0] == pytest.approx(2.0)
        assert (out / "growth.png").read_bytes()[:4] == b"\x89PNG"
        assert capsys.readouterr().out.startswith("fit:")

    def test_config_file(self, tmp_path, capsys):
        cfg = write(tmp_path, "[growth]\nn = 128\nt_max = 1.5\n")
        assert cli.cli_main(["growth", "--config", cfg]) == cli.EXIT_OK
        assert "n=128" in capsys.readouterr().out

    def test_relax_config_rejected(self, tmp_path):
        assert cli.cli_main(["growth", "--config", write(tmp_path, ABC)]) == cli.EXIT_USAGE

    def test_bad_window(self):
        assert cli.cli_main(["growth", "--t-max", "2", "--fit-window", "1", "3"]) == cli.EXIT_USAGE


class TestUsage:
    @pytest.mark.parametrize("argv", [[], ["bogus"], ["relax"], ["growth", "--n", "ten"],
                                      ["growth", "--model", "spiral"]])
    def test_bad_arguments(self, argv, capsys):
        assert cli.cli_main(argv) == cli.EXIT_USAGE
        assert "error" in capsys.readouterr().err

    def test_help(self, capsys):
        assert cli.cli_main(["--help"]) == cli.EXIT_OK
        assert "relax" in capsys.readouterr().out

    def test_entry_point(self, tmp_path):
        proc = subprocess.run([sys.executable, "-m", "voigtmhd.cli", "diagnose", "--checkpoint",
                               str(tmp_path / "missing.vmhs")], capture_output=True, text=True)
        assert proc.returncode == cli.EXIT_USAGE
        assert "missing.vmhs" in proc.stderr
