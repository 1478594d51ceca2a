import subprocess
import sys
from pathlib import Path

from wflift.io import parse_ensemble

SCRIPTS = Path(__file__).resolve().parent.parent / "scripts"


def run(name, *args, cwd):
    return subprocess.run([sys.executable, str(SCRIPTS / name), *args], cwd=cwd,
                          capture_output=True, text=True, check=True)


def test_make_design_and_noisy(tmp_path):
    run("make_design_ensemble.py", "5", "d5.txt", cwd=tmp_path)
    assert parse_ensemble(tmp_path / "d5.txt").m == 30
    out = run("run_noisy.py", "--ensemble", "d5.txt", "--trials", "3", "--max-iterations", "100", cwd=tmp_path)
    assert "slope" in out.stdout
    assert (tmp_path / "noisy.csv").read_text().startswith("snr_db,")


def test_reproduce_figures(tmp_path):
    run("reproduce_figures.py", "--points", "20", "--full-range", cwd=tmp_path)
    lines = (tmp_path / "curves.csv").read_text().splitlines()
    assert len(lines) == 21 and lines[-1].endswith("false")


def test_run_sweep(tmp_path):
    run("run_sweep.py", "--n", "4", "--ratios", "8", "--trials", "2", cwd=tmp_path)
    assert (tmp_path / "sweep.csv").read_text().startswith("ratio,trials")
