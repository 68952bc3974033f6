"""Logging configuration"""

import logging
import sys

from core.config import get_settings

_HANDLER_NAME = "herdfield-console"


def setup_logging(level: str | None = None) -> None:
    """Configure application logging"""
    settings = get_settings()
    log_level = getattr(logging, (level or settings.log_level).upper(), logging.INFO)

    # Create formatter
    formatter = logging.Formatter(
        "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )

    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)

    # Repeated CLI invocations in one process must not stack handlers
    if any(h.get_name() == _HANDLER_NAME for h in root_logger.handlers):
        return

    # Console handler
    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.set_name(_HANDLER_NAME)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)
