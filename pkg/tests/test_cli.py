import json
import os

import pytest

from qdistill import cli


def run(args):
    return cli.main(args)


@pytest.fixture(scope="module")
def trained_dir(tmp_path_factory):
    d = str(tmp_path_factory.mktemp("train"))
    rc = run(["train", "--data", "iris", "--template", "c2", "--layers", "1",
              "--epochs", "2", "--seed", "7", "--out", d])
    assert rc == 0
    return d


def test_train_artifacts(trained_dir):
    names = sorted(os.listdir(trained_dir))
    assert "c2_1l_seed7.json" in names
    assert "c2_1l_seed7_history.csv" in names
    assert "manifest.json" in names
    with open(os.path.join(trained_dir, "manifest.json")) as fh:
        man = json.load(fh)
    assert man["command"] == "train"
    assert man["seed"] == 7
    for rel in man["artifacts"]:
        assert os.path.exists(os.path.join(trained_dir, rel))
    hist = open(os.path.join(trained_dir, "c2_1l_seed7_history.csv")).read()
    lines = hist.strip().splitlines()
    assert lines[0].startswith("# train ")
    assert lines[1] == "epoch,train_loss,train_acc,val_loss,val_acc"
    assert len(lines) == 2 + 3   # epoch 0 plus 2 training epochs


def test_train_rerun_is_bit_identical(trained_dir, tmp_path):
    d2 = str(tmp_path / "again")
    rc = run(["train", "--data", "iris", "--template", "c2", "--layers", "1",
              "--epochs", "2", "--seed", "7", "--out", d2])
    assert rc == 0
    for name in ("c2_1l_seed7.json", "c2_1l_seed7_history.csv"):
        a = open(os.path.join(trained_dir, name), "rb").read()
        b = open(os.path.join(d2, name), "rb").read()
        assert a == b


def test_distill_and_replay_round_trip(trained_dir, tmp_path):
    d1, d2 = str(tmp_path / "a"), str(tmp_path / "b")
    teacher = os.path.join(trained_dir, "c2_1l_seed7.json")
    rc = run(["distill", "--teacher", teacher, "--template", "c2",
              "--layers", "1", "--budget", "300", "--seeds", "0,1",
              "--out", d1])
    assert rc == 0
    rc = run(["replay", "--manifest", os.path.join(d1, "manifest.json"),
              "--out", d2])
    assert rc == 0
    for name in ("student_c2_1l.json", "distances.csv"):
        assert (open(os.path.join(d1, name), "rb").read()
                == open(os.path.join(d2, name), "rb").read())
    doc = json.load(open(os.path.join(d1, "student_c2_1l.json")))
    assert doc["fine_tuned"] is False


def test_finetune_reports_recovery_columns(trained_dir, tmp_path):
    d = str(tmp_path / "ft")
    ckpt = os.path.join(trained_dir, "c2_1l_seed7.json")
    rc = run(["finetune", "--checkpoint", ckpt, "--data", "iris",
              "--epochs", "1", "--out", d])
    assert rc == 0
    text = open(os.path.join(d, "c2_1l_seed7_ft_report.csv")).read()
    lines = text.strip().splitlines()
    assert lines[1] == "split,approx_acc,finetuned_acc"
    assert lines[2].startswith("train,")
    assert lines[3].startswith("val,")
    doc = json.load(open(os.path.join(d, "c2_1l_seed7_ft.json")))
    assert doc["fine_tuned"] is True


def test_transpile_report_rows(tmp_path):
    d = str(tmp_path)
    rc = run(["transpile-report", "--qubits", "4", "--out", d])
    assert rc == 0
    lines = open(os.path.join(d, "overhead.csv")).read().strip().splitlines()
    # 6 templates x 2 bases plus comment and header
    assert len(lines) == 2 + 12


def test_fidelity_sweep_small(tmp_path):
    d = str(tmp_path)
    rc = run(["fidelity-sweep", "--qubits", "2", "--instances", "2",
              "--budget", "200", "--out", d])
    assert rc == 0
    lines = open(os.path.join(d, "fidelity.csv")).read().strip().splitlines()
    assert lines[1] == "n_qubits,mean_fidelity,std_fidelity"
    n, mean, std = lines[2].split(",")
    assert n == "2"
    assert 0.0 <= float(mean) <= 1.0


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["distill"])            # missing required --teacher
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        run(["no-such-command"])
    assert exc.value.code == 2


def test_epoch_zero_rejected(tmp_path):
    rc = run(["train", "--data", "iris", "--epochs", "0",
              "--out", str(tmp_path)])
    assert rc == cli.EXIT_USAGE


def test_data_errors_exit_3(tmp_path):
    d = str(tmp_path)
    assert run(["distill", "--teacher", "/does/not/exist.json",
                "--out", d]) == cli.EXIT_DATA
    assert run(["train", "--data", "/does/not/exist.csv", "--out", d]) \
        == cli.EXIT_DATA
    assert run(["replay", "--manifest", "/does/not/exist.json",
                "--out", d]) == cli.EXIT_DATA


def test_env_var_default_out(tmp_path, monkeypatch, trained_dir):
    d = str(tmp_path / "envout")
    monkeypatch.setenv("QDISTILL_OUT", d)
    rc = run(["transpile-report", "--qubits", "4"])
    assert rc == 0
    assert os.path.exists(os.path.join(d, "overhead.csv"))
