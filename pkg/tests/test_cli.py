import json
import os

import pytest

from budgetgraph.cli import main
from tests.helpers import CONFIGS

SMOKE = os.path.join(CONFIGS, "buy_all_smoke.ini")


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for name in ("BUDGETGRAPH_CI", "BUDGETGRAPH_JOBS", "BUDGETGRAPH_OUT_DIR", "BUDGETGRAPH_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)


def read_lines(path):
    with open(path, "r", encoding="utf-8") as f:
        return f.read().splitlines()


def test_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["--help"])
    assert excinfo.value.code == 0
    assert "simulate" in capsys.readouterr().out


def test_unknown_subcommand_exits_two():
    with pytest.raises(SystemExit) as excinfo:
        main(["explode"])
    assert excinfo.value.code == 2


def test_missing_config_exits_two(out_dir, capsys):
    assert main(["simulate", "--config", "no-such.ini", "--seed", "1", "--out-dir", out_dir]) == 2
    assert "no-such.ini" in capsys.readouterr().err


def test_bad_strategy_names_the_field(tmp_path, out_dir, capsys):
    config = tmp_path / "bad.ini"
    config.write_text("[process]\nn = 5\nt = 3\n[strategy]\nname = teleport\n[checker]\nname = nonempty\n", encoding="utf-8")
    assert main(["simulate", "--config", str(config), "--seed", "1", "--out-dir", out_dir]) == 2
    assert "strategy.name" in capsys.readouterr().err


def test_seed_is_required_in_ci_mode(monkeypatch, out_dir):
    monkeypatch.setenv("BUDGETGRAPH_CI", "1")
    assert main(["simulate", "--config", SMOKE, "--out-dir", out_dir]) == 2
    assert not os.path.exists(out_dir)


def test_simulate_writes_consistent_outputs(out_dir):
    assert main(["simulate", "--config", SMOKE, "--seed", "7", "--out-dir", out_dir]) == 0
    summary = read_lines(os.path.join(out_dir, "summary.csv"))
    trials = read_lines(os.path.join(out_dir, "trials.jsonl"))
    assert summary[0].startswith("# budgetgraph ")
    assert summary[0].endswith("seed=7")
    assert trials[0] == summary[0]
    assert summary[1] == "strategy,n,t,b,trials,successes,mean_budget_used,seconds"
    row = summary[2].split(",")
    assert row[:5] == ["buy_all", "30", "50", "50", "10"]
    assert 0 <= int(row[5]) <= 10
    assert row[7] == "0.000"
    records = [json.loads(line) for line in trials[1:]]
    assert len(records) == 10
    assert sum(record["success"] for record in records) == int(row[5])
    assert all(record["budget_used"] == 50 for record in records)
    assert not os.path.exists(os.path.join(out_dir, "strategy_params.json"))


def test_simulate_is_byte_identical(tmp_path):
    first, second = str(tmp_path / "a"), str(tmp_path / "b")
    assert main(["simulate", "--config", SMOKE, "--seed", "3", "--out-dir", first]) == 0
    assert main(["simulate", "--config", SMOKE, "--seed", "3", "--out-dir", second, "--jobs", "2"]) == 0
    for name in ("summary.csv", "trials.jsonl"):
        with open(os.path.join(first, name), "rb") as a, open(os.path.join(second, name), "rb") as b:
            assert a.read() == b.read()


def test_simulate_writes_partition_parameters(tmp_path, out_dir):
    config = tmp_path / "pm.ini"
    config.write_text(
        "[process]\nn = 40\nt_fraction = 0.5\ntrials = 2\n"
        "[strategy]\nname = partition_factor\npattern = K2\n"
        "[checker]\nname = f_factor\n",
        encoding="utf-8",
    )
    assert main(["simulate", "--config", str(config), "--seed", "1", "--out-dir", out_dir]) == 0
    lines = read_lines(os.path.join(out_dir, "strategy_params.json"))
    params = json.loads(lines[1])
    assert params["pattern"] == "K2"
    assert sum(params["part_sizes"]) == 40


def test_curves(out_dir):
    assert main(["curves", "--clique", "3", "--ham-power", "2", "--x", "4/3", "2", "--seed", "1", "--out-dir", out_dir]) == 0
    lines = read_lines(os.path.join(out_dir, "curves.csv"))
    assert lines[1] == "family,param,x,log_n_b,kind"
    assert lines[2:] == [
        "clique_factor,3,1.333333,1.333333,lower_bound",
        "clique_factor,3,2.000000,1.000000,lower_bound",
        "ham_power,2,2.000000,1.000000,lower_bound",
    ]


def test_curves_for_a_pattern(out_dir):
    assert main(["curves", "--pattern", "K3", "--points", "3", "--seed", "1", "--out-dir", out_dir]) == 0
    lines = read_lines(os.path.join(out_dir, "curves.csv"))
    assert lines[2] == "f_factor,3/2,1.333333,1.333333,lower_bound"
    assert len(lines) == 5


def test_curves_rejects_bad_grid(out_dir):
    assert main(["curves", "--clique", "3", "--x", "abc", "--seed", "1", "--out-dir", out_dir]) == 2


def test_oracle(out_dir):
    assert main(["oracle", "--n", "3", "--t", "3", "--b", "3", "--dump", "--seed", "1", "--out-dir", out_dir]) == 0
    lines = read_lines(os.path.join(out_dir, "oracle.json"))
    payload = json.loads(lines[1])
    assert payload["report"]["value"] == "1/1"
    assert "values" in payload


@pytest.mark.parametrize("argv", [
    ["oracle", "--n", "3", "--t", "3", "--b", "3", "--checker", "acyclic"],
    ["oracle", "--n", "3", "--t", "3", "--b", "3", "--checker", "planar"],
    ["oracle", "--n", "6", "--t", "3", "--b", "3"],
])
def test_oracle_errors(argv, out_dir):
    assert main(argv + ["--seed", "1", "--out-dir", out_dir]) == 2


def test_coupling_test_gnm(out_dir):
    assert main(["coupling-test", "--test", "gnm", "--samples", "2000", "--seed", "4", "--out-dir", out_dir]) == 0
    payload = json.loads(read_lines(os.path.join(out_dir, "coupling_gnm.json"))[1])
    assert payload["test"] == "gnm"
    assert payload["dof"] == 19


def test_coupling_test_fkg(out_dir):
    assert main(["coupling-test", "--test", "fkg", "--n", "3", "--p", "1/4", "--seed", "4", "--out-dir", out_dir]) == 0
    payload = json.loads(read_lines(os.path.join(out_dir, "coupling_fkg.json"))[1])
    assert len(payload["reports"]) == 10
    assert all(report["holds"] for report in payload["reports"])


def test_coupling_test_multistage_options(out_dir):
    argv = [
        "coupling-test", "--test", "multistage", "--samples", "600", "--n", "3",
        "--stage-lengths", "1", "1", "1", "--stage-p", "0.5", "0.4", "0.3", "--stage-pbar", "0.1", "0.1", "0.1",
        "--seed", "5", "--out-dir", out_dir,
    ]
    assert main(argv) == 0
    lines = read_lines(os.path.join(out_dir, "coupling_multistage.json"))
    payload = json.loads(lines[1])
    assert payload["test"] == "multistage"
    assert payload["samples"] == 600
    assert payload["dof"] == 5
    assert payload["containment_violations"] == 0


def test_coupling_test_multistage_rejects_ragged_lists(out_dir):
    argv = [
        "coupling-test", "--test", "multistage", "--samples", "10", "--n", "3",
        "--stage-lengths", "1", "1", "--stage-p", "0.5", "--seed", "5", "--out-dir", out_dir,
    ]
    assert main(argv) == 2
