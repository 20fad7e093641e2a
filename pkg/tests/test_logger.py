import logging

from src.logger import setup_logger


def test_file_handler_only_with_log_dir(tmp_path):
    logger = setup_logger("friedrichs.test_console", {"logging": {"level": "DEBUG"}})
    assert [type(h) for h in logger.handlers] == [logging.StreamHandler]
    assert logger.level == logging.DEBUG

    config = {"logging": {"level": "INFO", "log_dir": str(tmp_path), "log_file": "run_{timestamp}.log"}}
    logger = setup_logger("friedrichs.test_console", config)
    assert len(logger.handlers) == 2
    logger.info("grid ready")
    for handler in logger.handlers:
        handler.flush()
    (log_file,) = tmp_path.glob("run_*.log")
    assert "| INFO | friedrichs.test_console | grid ready" in log_file.read_text()


def test_unconfigured_call_keeps_handlers():
    configured = setup_logger("friedrichs.test_keep", {"logging": {"level": "WARNING"}})
    handlers = list(configured.handlers)
    again = setup_logger("friedrichs.test_keep")
    assert again.handlers == handlers
    assert again.level == logging.WARNING
