import logging as std_logging
import os

from src.logger import LOG_FILE, configure_logger, console_level, log_file_path


def test_log_file_is_named_after_the_project():
    assert LOG_FILE.startswith("bandrmt_") and LOG_FILE.endswith(".log")
    assert os.path.basename(log_file_path) == LOG_FILE
    assert os.path.basename(os.path.dirname(log_file_path)) == "logs"


def test_handlers_are_attached_once():
    root = std_logging.getLogger()
    before = len(root.handlers)
    configure_logger()
    configure_logger()
    assert len(root.handlers) == before


def test_console_level_follows_the_environment(monkeypatch):
    monkeypatch.setenv("BANDRMT_LOG_LEVEL", "debug")
    assert console_level() == std_logging.DEBUG
    monkeypatch.setenv("BANDRMT_LOG_LEVEL", "chatty")
    assert console_level() == std_logging.INFO
    monkeypatch.delenv("BANDRMT_LOG_LEVEL")
    assert console_level() == std_logging.INFO
