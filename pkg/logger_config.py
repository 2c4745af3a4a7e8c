import logging
import sys
from logging.handlers import RotatingFileHandler

from config import settings


def setup_logger(name):
    """
    Creates a logger that writes to the console (stderr) and, unless disabled
    in settings, to a rotating log file.
    """
    logger = logging.getLogger(name)
    logger.setLevel(settings.log_level.upper())

    # prevent adding handlers multiple times if function is called twice
    if logger.hasHandlers():
        return logger

    # Format: [Time] [Level] [Module]: Message
    formatter = logging.Formatter(
        '%(asctime)s - %(levelname)s - [%(name)s] - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    # Rotating: Max 5MB per file, keep last 3 backups
    if settings.log_file:
        file_handler = RotatingFileHandler(settings.log_file, maxBytes=5*1024*1024, backupCount=3)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    # stdout carries command output (eval JSON), so the console gets stderr
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    logger.propagate = False
    return logger
