import io
import os

import pytest

from mallowsAvoid.cli.commands import main
from mallowsAvoid.utils.logging_utils import LogManager


@pytest.fixture(autouse=True)
def reset_logging():
    yield
    LogManager.close()


@pytest.fixture
def config_path(tmp_path):
    return str(tmp_path / "config.json")


@pytest.fixture
def run_cli(config_path):
    """Ejecuta la CLI sin archivo de registro y devuelve (código, stdout)."""
    def run(*argv):
        stream = io.StringIO()
        code = main(["--no-log-file", "--config", config_path, *argv], stream=stream)
        return code, stream.getvalue()
    return run


@pytest.fixture
def clean_env(monkeypatch):
    for name in ("MALLOWS_THREADS", "MALLOWS_DEPTH_CAP"):
        monkeypatch.delenv(name, raising=False)
    return os.environ
