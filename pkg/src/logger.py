"""
Logging utilities for the Friedrichs decay toolkit
"""

import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

LOG_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
DEFAULT_LOG_FILE = "friedrichs_{timestamp}.log"


def _file_handler(log_config: Dict[str, Any]) -> Optional[logging.FileHandler]:
    log_dir_value = log_config.get("log_dir")
    if not log_dir_value:
        return None
    log_dir = Path(log_dir_value)
    log_dir.mkdir(parents=True, exist_ok=True)
    stamp = datetime.now().strftime(log_config.get("timestamp_format", "%Y-%m-%d_%H-%M-%S"))
    filename = log_config.get("log_file", DEFAULT_LOG_FILE).format(timestamp=stamp)
    return logging.FileHandler(log_dir / filename)


def setup_logger(name: str = "friedrichs", config: Optional[Dict[str, Any]] = None) -> logging.Logger:
    """
    Configure and return the toolkit logger.

    Console output goes to stderr so CSV/JSON on stdout stays clean. A
    timestamped log file is added only when ``logging.log_dir`` is set.
    Called without ``config`` on an already configured logger, the existing
    handlers are kept; with a config they are rebuilt, so each run gets its
    own level and file. Library modules log through children such as
    ``friedrichs.spectral``.
    """
    logger = logging.getLogger(name)
    if config is None and logger.handlers:
        return logger

    log_config = (config or {}).get("logging", {}) or {}
    level = getattr(logging, str(log_config.get("level", "INFO")).upper(), logging.INFO)
    logger.setLevel(level)
    logger.propagate = False

    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    formatter = logging.Formatter(fmt=LOG_FORMAT, datefmt=DATE_FORMAT)
    handlers = [logging.StreamHandler(sys.stderr)]
    file_handler = _file_handler(log_config)
    if file_handler is not None:
        handlers.append(file_handler)
    for handler in handlers:
        handler.setLevel(level)
        handler.setFormatter(formatter)
        logger.addHandler(handler)

    if file_handler is not None:
        logger.debug("Writing log to %s", file_handler.baseFilename)
    return logger
