"""Logging setup (loguru)."""

import sys

from loguru import logger

_FORMAT = (
    "<green>{time:HH:mm:ss.SSS}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{line}</cyan> - <level>{message}</level> {extra}"
)


def setup_logging(level: str = "INFO", serialize: bool = False) -> None:
    """Install a single stderr sink; serialize=True emits one JSON object per record."""
    logger.remove()
    if serialize:
        logger.add(sys.stderr, level=level.upper(), serialize=True)
    else:
        logger.add(sys.stderr, level=level.upper(), format=_FORMAT)
