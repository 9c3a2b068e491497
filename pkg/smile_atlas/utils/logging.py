"""Tiny logger helper to keep consistent formatting."""

import logging
import sys
from typing import Optional

from smile_atlas.config import settings


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """
    Return a logger with a simple stderr handler if none is configured.

    stdout is reserved for report data written by the CLI.
    """
    logger = logging.getLogger(name or "smile_atlas")
    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        formatter = logging.Formatter(
            "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
        )
        handler.setFormatter(formatter)
        logger.addHandler(handler)
        logger.setLevel(getattr(logging, settings.LOG_LEVEL, logging.INFO))
    return logger
