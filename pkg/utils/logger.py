"""
logger.py - Run logs for experiments and checks
ONE RESPONSIBILITY: Log operations
"""

import logging
import os
from datetime import datetime

from core.config import runtime_config

LOG_FILE = None


def setup_logging(verbose=False, log_dir=None):
    """
    Start a timestamped log file; echo to the terminal in verbose mode.

    Returns:
        str: Path of the log file
    """
    global LOG_FILE

    log_dir = log_dir or runtime_config.log_dir
    os.makedirs(log_dir, exist_ok=True)

    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    LOG_FILE = os.path.join(log_dir, f"irs_sensing_{timestamp}.log")

    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(levelname)s - %(processName)s - %(message)s',
        handlers=[
            logging.FileHandler(LOG_FILE),
            logging.StreamHandler() if verbose else logging.NullHandler()
        ],
        force=True,
    )

    logging.info(f"Logging started - {timestamp}")
    return LOG_FILE


def log_info(message):
    logging.info(message)


def log_error(message):
    logging.error(message)


def log_warning(message):
    logging.warning(message)


def log_exception(message):
    """Error with the active traceback attached."""
    logging.exception(message)


def get_log_file():
    return LOG_FILE
