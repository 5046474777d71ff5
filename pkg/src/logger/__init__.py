import logging
import os
from datetime import datetime
from logging.handlers import RotatingFileHandler

from from_root import from_root

from src.constants import (LOG_BACKUP_COUNT, LOG_CONSOLE_LEVEL, LOG_DIR, LOG_LEVEL_ENV_KEY, LOG_MAX_BYTES,
                           PROJECT_NAME)

# one file per process start: bandrmt_<month>_<day>_<year>_<h>_<m>_<s>.log
LOG_FILE = f"{PROJECT_NAME}_{datetime.now().strftime('%m_%d_%Y_%H_%M_%S')}.log"

log_dir_path = os.path.join(from_root(), LOG_DIR)
os.makedirs(log_dir_path, exist_ok=True)
log_file_path = os.path.join(log_dir_path, LOG_FILE)


def console_level() -> int:
    """Console verbosity from BANDRMT_LOG_LEVEL (a level name), INFO when unset or unknown."""
    name = os.getenv(LOG_LEVEL_ENV_KEY, LOG_CONSOLE_LEVEL).upper()
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else logging.INFO


def configure_logger():
    """
    Rotating DEBUG log under logs/ plus a console handler on stderr, so that tables
    printed on stdout stay clean. Safe to call again; handlers are attached once.
    """
    logger = logging.getLogger()
    if getattr(logger, "_bandrmt_configured", False):
        return
    logger.setLevel(logging.DEBUG)

    formatter = logging.Formatter("[ %(asctime)s ] %(name)s %(threadName)s - %(levelname)s - %(message)s")

    file_handler = RotatingFileHandler(log_file_path, maxBytes=LOG_MAX_BYTES, backupCount=LOG_BACKUP_COUNT)
    file_handler.setFormatter(formatter)
    file_handler.setLevel(logging.DEBUG)

    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    console_handler.setLevel(console_level())

    logger.addHandler(file_handler)
    logger.addHandler(console_handler)
    logger._bandrmt_configured = True


configure_logger()
