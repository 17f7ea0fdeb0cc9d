"""
Logging setup for contrakt.

Diagnostics go to stderr. Stdout carries only the one-line JSON summary of
a command.
"""

import logging
import sys
from typing import List, Optional

from config import LOGGING_CONFIG

LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')


def _level(level: Optional[str]) -> int:
    name = str(level or LOGGING_CONFIG['level']).upper()
    if name not in LEVELS:
        raise ValueError(f"unknown log level '{level}'")
    return getattr(logging, name)


def setup_logger(
    name: str = 'contrakt',
    level: Optional[str] = None,
    log_format: Optional[str] = None,
    log_file: Optional[str] = None
) -> logging.Logger:
    """
    Attach a stderr handler, and a file handler when a log file is given.

    Library modules log under their module names, so the CLI configures the
    root logger (name=''). A logger that already has handlers only gets its
    level updated.

    Args:
        name: Logger name
        level: DEBUG, INFO, WARNING, ERROR or CRITICAL (default from LOGGING_CONFIG)
        log_format: Format string (default from LOGGING_CONFIG)
        log_file: Optional path of a log file

    Returns:
        Configured logger
    """
    numeric = _level(level)
    logger = logging.getLogger(name)
    logger.setLevel(numeric)
    if logger.handlers:
        return logger

    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    log_file = log_file or LOGGING_CONFIG['file']
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding='utf-8'))

    formatter = logging.Formatter(log_format or LOGGING_CONFIG['format'])
    for handler in handlers:
        handler.setLevel(numeric)
        handler.setFormatter(formatter)
        logger.addHandler(handler)
    return logger


def get_logger(name: str) -> logging.Logger:
    """Logger for a contrakt module, nested under the 'contrakt' name."""
    if name == 'contrakt' or name.startswith('contrakt.'):
        return logging.getLogger(name)
    return logging.getLogger(f'contrakt.{name}')
