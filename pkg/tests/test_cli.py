"""Smoke tests for the command-line entry points, run in-process via main()."""
import numpy as np
import pytest

from markerdec.cli import main
from markerdec.nn import save_checkpoint


def test_version(capsys):
    with pytest.raises(SystemExit) as ei:
        main(["--version"])
    assert ei.value.code == 0
    assert capsys.readouterr().out.startswith("markerdec ")


def test_oracle_check(capsys):
    assert main(["oracle-check", "--trials", "10", "--seed", "3"]) == 0
    out = capsys.readouterr().out
    assert "10 instances" in out
    assert "PASS" in out


def test_gradcheck(capsys):
    assert main(["gradcheck"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") >= 4
    assert "FAIL" not in out


def test_eval_writes_csv(tmp_path):
    cfg = tmp_path / "exp.ini"
    cfg.write_text(
        "[outer]\nkind = conv\nk = 12\n"
        "[decoder]\nkind = viterbi_sdd\n"
        "[channel]\npd = 0.03\n"
        "[run]\nmin_frame_errors = 0\nmax_frames = 1\nseed = 4\n")
    out = tmp_path / "pt.csv"
    assert main(["eval", str(cfg), "--out", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0].startswith("pd,ps,assumed_ps")
    assert lines[1].split(",")[0] == "0.03"


def test_sweep_stdout(tmp_path, capsys):
    cfg = tmp_path / "exp.ini"
    cfg.write_text(
        "[outer]\nkind = conv\nk = 8\n"
        "[decoder]\nkind = viterbi_sdd\n"
        "[channel]\npd = 0.02 0.04\n"
        "[run]\nmin_frame_errors = 0\nmax_frames = 1\n")
    assert main(["sweep", str(cfg)]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert len(lines) == 3  # header + one row per pd


def test_info(tmp_path, capsys):
    path = tmp_path / "x.ckpt"
    save_checkpoint(str(path), {"kind": "test"},
                    [("w", np.arange(6, dtype=np.float32).reshape(2, 3))])
    assert main(["info", str(path)]) == 0
    out = capsys.readouterr().out
    assert "sha256" in out
    assert "meta kind = test" in out
    assert "array w (2, 3)" in out
    assert "total values 6" in out


def test_bad_config_exits_nonzero(tmp_path, capsys):
    assert main(["eval", str(tmp_path / "missing.ini")]) == 1
    assert "error:" in capsys.readouterr().err


def test_train_estimator_tiny(tmp_path, capsys):
    cfg = tmp_path / "train.ini"
    cfg.write_text(
        "[outer]\nkind = conv\nk = 4\n"
        "[marker]\npattern = 01\nnc = 3\n"
        "[estimator]\nsteps = 2\nbatch = 2\nhidden = 4\nmlp = 4 1\n"
        "base_lr = 1e-3\ntrain_pd = 0.05\n")
    out = tmp_path / "est.ckpt"
    assert main(["train-estimator", str(cfg), "--out", str(out), "--seed", "1"]) == 0
    assert out.exists()
    assert "trained 2 steps" in capsys.readouterr().out
    assert main(["info", str(out)]) == 0


def test_train_decoder_tiny(tmp_path, capsys):
    cfg = tmp_path / "train.ini"
    cfg.write_text(
        "[outer]\nkind = conv\nk = 4\n"
        "[marker]\npattern = 01\nnc = 5\n"
        "[decoder-train]\nsteps = 2\nbatch = 2\nhidden = 4\nmlp = 4 1\n"
        "base_lr = 1e-3\ntrain_pd = 0.0\n")
    out = tmp_path / "dec.ckpt"
    assert main(["train-decoder", str(cfg), "--out", str(out), "--seed", "1"]) == 0
    assert out.exists()
    assert "trained 2 steps" in capsys.readouterr().out
