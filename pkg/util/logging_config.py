"""
Logging configuration for squidleak.
"""

import logging
import os
import sys
from pathlib import Path
from typing import Optional

LOG_LEVEL_ENV = "SQUIDLEAK_LOG_LEVEL"


def resolve_log_level(log_level: Optional[str] = None) -> str:
    """Explicit level, else $SQUIDLEAK_LOG_LEVEL, else INFO."""
    level = (log_level or os.getenv(LOG_LEVEL_ENV) or "INFO").upper()
    if not isinstance(getattr(logging, level, None), int):
        raise ValueError(f"Unknown log level: {level}")
    return level


def setup_logging(log_level: Optional[str] = None, log_file: str = "squidleak.log"):
    """
    Configure logging for the application.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Path to log file
    """
    level = resolve_log_level(log_level)

    log_path = Path(log_file)
    log_path.parent.mkdir(parents=True, exist_ok=True)

    # Reconfigured on every CLI invocation so each output directory gets its own log
    logging.basicConfig(
        level=getattr(logging, level),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(log_file, encoding='utf-8'),
            logging.StreamHandler(sys.stdout)
        ],
        force=True,
    )

    # Set specific loggers to reduce noise
    logging.getLogger('asyncio').setLevel(logging.WARNING)

    logger = logging.getLogger(__name__)
    logger.info(f"Logging configured - Level: {level}, File: {log_file}")
