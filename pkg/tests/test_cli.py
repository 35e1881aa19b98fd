import subprocess
import sys

import pytest

from ldpc_lattice.cli import EXIT_IO, EXIT_OK, EXIT_USAGE, main
from ldpc_lattice.ldpc_core import read_alist
from ldpc_lattice.shaping import rate_hypercube

SIM = ["sim-oneway", "n=100", "k=90", "powers=18,21", "max_trials=2", "energy_samples=200", "seed=5"]


def _run(capsys, *argv):
    rc = main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


def _body(text):
    return [line for line in text.splitlines() if not line.startswith("#")]


def test_rate(capsys):
    rc, out, _ = _run(capsys, "rate", "n=1000", "k=850", "L=8", "method=hypercube")
    assert rc == EXIT_OK and out.strip() == "3.01"
    rc, out, _ = _run(capsys, "rate", "n=1000", "k=850", "L=8", "L_parity=4", "method=nested")
    assert out.strip() == "2.85"


def test_gen_code_round_trip(capsys, tmp_path):
    path = tmp_path / "code.alist"
    rc, _, _ = _run(capsys, "gen-code", "n=100", "k=90", "w=3", "seed=7", f"out={path}")
    assert rc == EXIT_OK
    H = read_alist(path)
    assert (H.n, H.m) == (100, 10)
    path2 = tmp_path / "again.alist"
    _run(capsys, "gen-code", "--n", "100", "--k", "90", "--w", "3", "--seed", "7", "--out", str(path2))
    assert path.read_text() == path2.read_text()


def test_sim_deterministic_and_thread_independent(capsys):
    _, a, _ = _run(capsys, *SIM)
    _, b, _ = _run(capsys, *SIM)
    _, c, _ = _run(capsys, *SIM, "threads=2")
    assert _body(a) == _body(b) == _body(c)
    assert _body(a)[0].split(",")[:3] == ["topology", "n", "k"] and len(_body(a)) == 3


def test_header_echoes_defaults(capsys):
    _, out, _ = _run(capsys, *SIM)
    header = {l[2:].split("=", 1)[0] for l in out.splitlines() if l.startswith("# ")}
    assert {"command", "n", "k", "L", "method", "M", "T", "seed", "relay_share", "noise_model",
            "llr_model", "max_iter", "rho", "plan_seed"} <= header


def test_bounds(capsys):
    _, out, _ = _run(capsys, "bounds", "topology=one_way", "rate=3.01")
    row = dict(zip(*[l.split(",") for l in _body(out)]))
    assert float(row["min_sum_power_db"]) == pytest.approx(17.15, abs=0.05)


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# rate query\nn = 1000\nk = 850\nL = 8\nmethod = hypercube\n")
    rc, out, _ = _run(capsys, "rate", f"--config={cfg}")
    assert rc == EXIT_OK and out.strip() == "3.01"
    _, out, _ = _run(capsys, "rate", f"--config={cfg}", "L=4")
    assert out.strip() == f"{rate_hypercube(4, 850, 1000):.2f}"


def test_usage_errors(capsys):
    assert _run(capsys, "rate", "n=100", "k=90", "colour=blue")[0] == EXIT_USAGE
    assert _run(capsys, "rate", "n=abc")[0] == EXIT_USAGE
    assert _run(capsys, "teleport")[0] == EXIT_USAGE
    rc, _, err = _run(capsys, "sim-oneway", "n=100", "k=90", "relay_share=2")
    assert rc == EXIT_USAGE and len(err.strip().splitlines()) == 1


def test_io_errors(capsys, tmp_path):
    assert _run(capsys, "rate", f"--config={tmp_path / 'missing.cfg'}")[0] == EXIT_IO
    assert _run(capsys, "gen-code", "n=100", "k=90", f"out={tmp_path / 'no' / 'dir' / 'x.alist'}")[0] == EXIT_IO


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "ldpc_lattice", "rate", "n=1000", "k=850", "L=8"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == "3.01"
