import json
import logging
import os

from mallowsAvoid.utils.config_manager import ConfigManager
from mallowsAvoid.utils.logging_utils import LogManager


def test_creates_default_file(config_path):
    settings = ConfigManager(config_path)
    assert os.path.exists(config_path)
    assert settings.get_default("samples", environ={}) == 100000
    assert settings.get_default("format", environ={}) == "csv"


def test_fills_missing_keys(config_path):
    with open(config_path, "w", encoding="utf-8") as f:
        json.dump({"defaults": {"seed": 7}}, f)
    settings = ConfigManager(config_path)
    assert settings.get_default("seed", environ={}) == 7
    assert settings.get_default("depth_cap", environ={}) == 65536
    with open(config_path, encoding="utf-8") as f:
        assert "recent_runs" in json.load(f)


def test_corrupt_file_is_backed_up(config_path):
    with open(config_path, "w", encoding="utf-8") as f:
        f.write("{no es json")
    settings = ConfigManager(config_path)
    assert os.path.exists(config_path + ".bak")
    assert settings.config["defaults"] == ConfigManager.DEFAULT_CONFIG["defaults"]


def test_environment_overrides(config_path):
    settings = ConfigManager(config_path)
    assert settings.get_default("workers", environ={"MALLOWS_THREADS": "4"}) == 4
    assert settings.get_default("depth_cap", environ={"MALLOWS_DEPTH_CAP": "256"}) == 256
    assert settings.get_default("workers", environ={"MALLOWS_THREADS": "muchos"}) == 1


def test_recent_runs_are_bounded_and_deduplicated(config_path):
    settings = ConfigManager(config_path)
    for k in range(12):
        settings.add_recent_run("bounds", {"q": k})
    settings.add_recent_run("bounds", {"q": 5})
    runs = settings.get_recent_runs()
    assert len(runs) == 10
    assert runs[0] == {"command": "bounds", "args": {"q": 5}}
    assert runs.count(runs[0]) == 1
    assert ConfigManager(config_path).get_recent_runs() == runs


def test_console_logs_go_to_stderr(capsys):
    LogManager(log_to_file=False)
    LogManager.get_logger("mallowsAvoid.test").info("mensaje de prueba")
    captured = capsys.readouterr()
    assert "mensaje de prueba" in captured.err
    assert captured.out == ""


def test_close_allows_reinitialization():
    LogManager(log_to_file=False, debug=True)
    assert logging.getLogger().level == logging.DEBUG
    LogManager.close()
    LogManager(log_to_file=False)
    assert logging.getLogger().level == logging.INFO
