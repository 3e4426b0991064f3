import json
import shutil
import subprocess
import sys

import pytest

from matter.cli import main
from matter.dataset import release_from_columns, write_release
from matter.synthetic import bundled_corpus_dir


@pytest.fixture
def corpus(tmp_path):
    target = tmp_path / "corpus"
    shutil.copytree(bundled_corpus_dir(), target)
    return target


def test_evaluate_then_compare(corpus, tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["evaluate", "--config", str(corpus / "config.json"), "--out", str(out)]) == 0
    lines = (out / "results.csv").read_text().splitlines()
    assert len(lines) == 2 + 6 * 5 * 2
    assert main(["compare", str(out / "results.csv"), "--indicator", "mcc", "--budget-kind", "snm",
                 "--out", str(tmp_path / "cmp")]) == 0
    groups = json.loads((tmp_path / "cmp" / "grouping_mcc_snm_0.2.json").read_text())
    assert {g["model"] for g in groups["groups"]} == {"one", "manualdown", "manualup", "cla", "fcm", "sc"}
    assert (tmp_path / "cmp" / "delta_mcc_snm_0.2.csv").exists()
    assert "group 1" in capsys.readouterr().out


def test_overrides(corpus, tmp_path):
    out = tmp_path / "run"
    code = main(["evaluate", "--config", str(corpus / "config.json"), "--out", str(out), "--models", "one,cla",
                 "--budget-kind", "ssc", "--budget", "0.3", "--indicator", "recall", "--indicator", "g1",
                 "--seed", "3"])
    assert code == 0
    lines = (out / "results.csv").read_text().splitlines()
    assert "seed=3" in lines[0]
    assert lines[1].endswith("pii,pci,recall,g1,notes")
    assert len(lines) == 2 + 2 * 5
    assert all(",ssc,0.3," in line for line in lines[2:])


def test_compare_refuses_mixed_hashes(corpus, tmp_path, capsys):
    cfg = str(corpus / "config.json")
    assert main(["evaluate", "--config", cfg, "--out", str(tmp_path / "a"), "--models", "one,manualdown"]) == 0
    assert main(["evaluate", "--config", cfg, "--out", str(tmp_path / "b"), "--models", "one,manualup"]) == 0
    files = [str(tmp_path / "a" / "results.csv"), str(tmp_path / "b" / "results.csv")]
    assert main(["compare", *files, "--indicator", "mcc", "--out", str(tmp_path / "c")]) == 2
    assert "different configs" in capsys.readouterr().err
    assert main(["compare", *files, "--indicator", "mcc", "--out", str(tmp_path / "c"), "--force"]) == 0


def test_sweep(corpus, tmp_path):
    out = tmp_path / "sw"
    assert main(["sweep", "--config", str(corpus / "config.json"), "--axis", "excluded-pct",
                 "--grid", "0,0.1,0.2", "--models", "one", "--out", str(out)]) == 0
    lines = (out / "sweep_excluded-pct.csv").read_text().splitlines()
    assert lines[1] == "axis,grid_value,model,release,budget_kind,fraction,indicator,value"
    # 3 points x 5 releases x 2 budgets x (4 cut fields + 3 indicators)
    assert len(lines) == 2 + 3 * 5 * 2 * 7


def test_validate(corpus, tmp_path, capsys):
    assert main(["validate", "--config", str(corpus / "config.json"), "--strict"]) == 0
    assert "5/5 releases pass" in capsys.readouterr().out
    write_release(release_from_columns(["a", "b"], [1, 2], [1, 0]), tmp_path / "small.csv")
    (tmp_path / "cfg.json").write_text(json.dumps({"corpus": ["small.csv"]}))
    assert main(["validate", "--config", str(tmp_path / "cfg.json")]) == 0
    assert main(["validate", "--config", str(tmp_path / "cfg.json"), "--strict"]) == 2
    out = capsys.readouterr().out
    assert "FAIL small" in out and "k=2 < 100 instances" in out


def test_one_rank(tmp_path, capsys):
    (tmp_path / "r.csv").write_text("name,loc\na,9\nb,8\nc,7\nd,6\ne,5\nf,5\ng,10\n")
    assert main(["one-rank", str(tmp_path / "r.csv"), "--id-column", "name", "--sloc-column", "loc"]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert rows[0] == "rank,id,sloc"
    assert [r.split(",")[1] for r in rows[1:]] == list("abcdefg")
    assert main(["one-rank", str(tmp_path / "r.csv"), "--id-column", "name", "--sloc-column", "loc",
                 "--excluded", "0", "--out", str(tmp_path / "o.csv")]) == 0
    assert (tmp_path / "o.csv").read_text().splitlines()[1] == "1,g,10"


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["evaluate"], ["sweep", "--config", "x.json"],
                                  ["one-rank", "r.csv", "--excluded", "lots"]])
def test_usage_errors_exit_1(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 1


def test_bad_config_values_exit_1(tmp_path):
    (tmp_path / "cfg.json").write_text(json.dumps({"corpus": ["x.csv"], "models": ["svm"]}))
    assert main(["evaluate", "--config", str(tmp_path / "cfg.json")]) == 1
    (tmp_path / "bad.json").write_text("{not json")
    assert main(["evaluate", "--config", str(tmp_path / "bad.json")]) == 1


def test_data_errors_exit_2(tmp_path):
    assert main(["evaluate", "--config", str(tmp_path / "missing.json")]) == 2
    (tmp_path / "r.csv").write_text("id,sloc,bug\na,0,1\n")
    (tmp_path / "cfg.json").write_text(json.dumps({"corpus": ["r.csv"]}))
    assert main(["evaluate", "--config", str(tmp_path / "cfg.json")]) == 2


def test_model_errors_exit_3(tmp_path, capsys):
    write_release(release_from_columns(["a", "b", "c"], [1, 2, 3], [1, 0, 0], {"m": [4, 4, 4]}),
                  tmp_path / "r.csv")
    (tmp_path / "cfg.json").write_text(json.dumps({"corpus": ["r.csv"], "models": ["one", "fcm"],
                                                   "output_dir": "out"}))
    assert main(["evaluate", "--config", str(tmp_path / "cfg.json")]) == 3
    err = capsys.readouterr().err
    assert "fcm on r: degenerate clustering" in err
    # the other model's rows are still written
    assert len((tmp_path / "out" / "results.csv").read_text().splitlines()) == 2 + 2


def test_module_entry_point(tmp_path):
    (tmp_path / "r.csv").write_text("id,sloc\na,1\nb,3\n")
    done = subprocess.run([sys.executable, "-m", "matter", "one-rank", str(tmp_path / "r.csv")],
                          capture_output=True, text=True, check=False)
    assert done.returncode == 0 and done.stdout.splitlines()[1] == "1,b,3"
