import json

import pytest

from uzawa_afem.cli import main


def write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_zero_problem_run(tmp_path, capsys):
    cfg = write(tmp_path, "problem = zero\n")
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["n_steps"] == 1 and summary["mu_final"] == 0.0
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["outputs"]) == {"runlog", "summary", "manifest"}
    assert len(manifest["input_sha256"]) == 64
    assert len((out / "runlog.csv").read_text().splitlines()) == 2


def test_section_header_is_optional(tmp_path):
    cfg = write(tmp_path, "[config]\nproblem = zero\n")
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    bad = write(tmp_path, "[other]\nproblem = zero\n", "bad.cfg")
    assert main(["run", "--config", bad, "--out", str(tmp_path / "o")]) == 1


def test_invariant_violation_is_an_input_error(tmp_path, capsys):
    cfg = write(tmp_path, "kappa2 = 0.5\nvartheta = 0.4\n")
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 1
    assert "kappa2 < vartheta" in capsys.readouterr().err


def test_unknown_key(tmp_path, capsys):
    cfg = write(tmp_path, "kapa2 = 0.1\n")
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 1
    assert "unknown" in capsys.readouterr().err


def test_missing_config(tmp_path):
    assert main(["run", "--config", str(tmp_path / "none.cfg")]) == 1
    assert main(["run"]) == 1


def test_run_is_byte_deterministic(tmp_path):
    cfg = write(tmp_path, "problem = smooth\nmax_elements = 800\n")
    for d in ("a", "b"):
        assert main(["run", "--config", cfg, "--out", str(tmp_path / d), "--seed", "7"]) == 0
    assert (tmp_path / "a" / "runlog.csv").read_bytes() == (tmp_path / "b" / "runlog.csv").read_bytes()


def test_plotdata(tmp_path):
    cfg = write(tmp_path, "problem = smooth\nmax_elements = 800\n")
    run_dir = tmp_path / "r"
    assert main(["run", "--config", cfg, "--out", str(run_dir)]) == 0
    assert main(["plotdata", str(run_dir / "runlog.csv"), "--out", str(tmp_path / "p")]) == 0
    for name in ("mu.dat", "eta.dat", "div.dat"):
        rows = (tmp_path / "p" / name).read_text().splitlines()[1:]
        assert rows and all(len(r.split()) == 2 for r in rows)
    assert main(["plotdata", str(tmp_path / "missing.csv")]) == 1


def test_verify_single_suite(capsys):
    assert main(["verify", "--quick", "--suite", "doerfler_minimality"]) == 0
    assert "PASS" in capsys.readouterr().out
    assert main(["verify", "--suite", "nonsense"]) == 1


def test_oracle(tmp_path):
    out = tmp_path / "o"
    assert main(["oracle", "--problem", "smooth", "--n-max", "3", "--out", str(out)]) == 0
    rows = (out / "envelope.csv").read_text().splitlines()
    assert rows[0] == "N,envelope,count" and len(rows) == 5
    assert json.loads((out / "oracle.json").read_text())["complete"]
    assert main(["oracle", "--n-max", "20", "--out", str(out)]) == 1
    assert main(["oracle", "--problem", "nope", "--n-max", "1", "--out", str(out)]) == 1


@pytest.mark.parametrize("argv", [["--version"], ["--help"]])
def test_informational_flags(argv):
    assert main(argv) == 0
