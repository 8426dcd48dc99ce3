"""Loguru sink configuration; stdout stays reserved for JSON summaries"""
import sys
from typing import Optional
from loguru import logger
from app.core.config import settings


def setup_logging(level: Optional[str] = None, log_file: Optional[str] = None) -> None:
    """
    Route loguru output to stderr (and optionally a rotating file)

    Args:
        level: Log level name, defaults to settings.LOG_LEVEL
        log_file: Optional file path, defaults to settings.LOG_FILE
    """
    level = level or settings.LOG_LEVEL
    log_file = log_file or settings.LOG_FILE

    logger.remove()
    logger.add(
        sys.stderr,
        level=level,
        format="{time:YYYY-MM-DD HH:mm:ss} - {name} - {level} - {message}",
    )
    if log_file:
        logger.add(log_file, level=level, rotation="10 MB", enqueue=False)
