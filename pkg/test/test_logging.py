import io
import json

import pytest

from app.common.errors import EXIT_ERROR, EXIT_OK
from logger.logger import LogConfig, config_from_settings, get_logger, setup_logging
from main import run


@pytest.fixture(autouse=True)
def reset_logging():
    yield
    setup_logging()


@pytest.fixture
def kappa_table(write_table):
    return write_table("k.csv", ("x", "kappa"), [(0.0, 1.0), (4.0, 1.0)])


def test_verbose_logs_debug_to_stderr_only(kappa_table, capsys) -> None:
    args = ["sigma", "--kappa", str(kappa_table), "--theta", "1.0", "--t", "0.5", "--verbose"]
    assert run(args) == EXIT_OK
    captured = capsys.readouterr()
    assert "kcurve sigma" in captured.err
    assert "kcurve sigma" not in captured.out
    float(captured.out.strip())


def test_settings_pick_the_level(monkeypatch) -> None:
    monkeypatch.setenv("KCURVE_LOG_LEVEL", "error")
    assert config_from_settings().level == "ERROR"
    assert config_from_settings(verbose=True).level == "DEBUG"
    monkeypatch.delenv("KCURVE_LOG_LEVEL")
    assert config_from_settings().log_file is None


def test_log_file_records_the_subcommand(kappa_table, tmp_path, monkeypatch, capsys) -> None:
    log_file = tmp_path / "logs" / "kcurve.log"
    monkeypatch.setenv("KCURVE_LOG_FILE", str(log_file))
    assert run(["sigma", "--kappa", str(kappa_table), "--theta", "1.0", "--t", "1.5"]) == EXIT_ERROR
    capsys.readouterr()
    setup_logging()
    text = log_file.read_text(encoding="utf-8")
    assert "| sigma |" in text
    assert "DOMAIN_ERROR" in text


def test_json_records() -> None:
    stream = io.StringIO()
    setup_logging(LogConfig(level="INFO", json_logs=True), stream=stream)
    get_logger("kcurve.test").info("✅ margin {0.5}")
    record = json.loads(stream.getvalue().splitlines()[-1])
    assert record["module"] == "kcurve.test"
    assert record["level"] == "INFO"
    assert record["message"] == "✅ margin {0.5}"
    assert record["subcommand"] == "-"
