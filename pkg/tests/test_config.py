import pytest

from budgetgraph.config import load_config, load_settings, parse_config
from budgetgraph.errors import ConfigError

VALID = """
[process]
n = 30
t_fraction = 0.5
trials = 4

[strategy]
name = forest

[checker]
name = acyclic
"""


def test_parse_valid_config():
    config, digest = parse_config(VALID)
    assert config.process.resolved_t == 217
    assert config.strategy.name == "forest"
    assert config.strategy.budget is None
    assert len(digest) == 16


def test_hash_ignores_layout():
    reordered = """
[checker]
name=acyclic
[strategy]
name =   forest
[process]
trials = 4
t_fraction = 0.5
n = 30
"""
    assert parse_config(VALID)[1] == parse_config(reordered)[1]
    assert parse_config(VALID)[1] != parse_config(VALID.replace("trials = 4", "trials = 5"))[1]


@pytest.mark.parametrize("text, field", [
    (VALID.replace("name = forest", "name = teleport"), "strategy.name"),
    (VALID.replace("n = 30", "n = 0"), "process.n"),
    (VALID.replace("t_fraction = 0.5", "t = 500"), "process"),
    (VALID.replace("t_fraction = 0.5", "t_fraction = 0.5\nt = 10"), "process"),
    (VALID.replace("name = acyclic", "name = acyclic\ncolour = red"), "checker.colour"),
    (VALID.replace("[checker]\nname = acyclic", ""), "checker"),
    (VALID + "\n[extra]\nkey = 1\n", "extra"),
    ("not an ini file", "config"),
])
def test_config_errors_name_the_field(text, field):
    with pytest.raises(ConfigError) as excinfo:
        parse_config(text)
    assert excinfo.value.field == field


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError) as excinfo:
        load_config(str(tmp_path / "missing.ini"))
    assert excinfo.value.field == "config"


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("BUDGETGRAPH_CI", "yes")
    monkeypatch.setenv("BUDGETGRAPH_JOBS", "3")
    monkeypatch.setenv("BUDGETGRAPH_OUT_DIR", "out")
    monkeypatch.setenv("BUDGETGRAPH_LOG_LEVEL", "info")
    settings = load_settings()
    assert (settings.ci, settings.jobs, settings.out_dir, settings.log_level) == (True, 3, "out", "INFO")


def test_settings_defaults_and_errors(monkeypatch):
    for name in ("BUDGETGRAPH_CI", "BUDGETGRAPH_JOBS", "BUDGETGRAPH_OUT_DIR", "BUDGETGRAPH_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    settings = load_settings()
    assert (settings.ci, settings.jobs, settings.out_dir) == (False, 1, "results")
    monkeypatch.setenv("BUDGETGRAPH_JOBS", "many")
    with pytest.raises(ConfigError):
        load_settings()
