#!/usr/bin/env python3
"""
Manage logging
"""

import logging
import logging.handlers
import os
import sys
import tempfile
from pathlib import Path

DEFAULT_LOG_NAME = 'multimode_hom.log'


def _default_log_path():
    return os.path.join(tempfile.gettempdir(), DEFAULT_LOG_NAME)


def setup_logging(log_file_path=None, level=logging.INFO):
    """Setup logging with console (stderr) and rotating file output.

    Args:
        log_file_path: Path to log file. If None, defaults to temp directory.
        level: Level for both handlers.

    Returns:
        str: Path to the log file being used, or None for console only

    Note:
        Priority for log file path is handled by the CLI:
        1. Command line argument (--log-file)
        2. Environment variable (MULTIMODE_HOM_LOG_FILE)
        3. Configuration file (logging.log_file)
        4. Default (temp directory)

        Command results go to stdout, so the console handler uses stderr.
    """
    if log_file_path is None:
        log_file_path = _default_log_path()

    try:
        Path(log_file_path).parent.mkdir(parents=True, exist_ok=True)
    except (OSError, PermissionError) as e:
        print(f"Warning: Cannot create log directory at {log_file_path}: {e}", file=sys.stderr)
        print("Falling back to temp directory", file=sys.stderr)
        log_file_path = _default_log_path()
        try:
            Path(log_file_path).parent.mkdir(parents=True, exist_ok=True)
        except (OSError, PermissionError) as e2:
            print(f"Error: Cannot create log directory in temp: {e2}", file=sys.stderr)
            print("Logging to console only", file=sys.stderr)
            log_file_path = None

    root_logger = logging.getLogger()
    root_logger.setLevel(level)

    # Remove existing handlers to avoid duplicates
    for handler in list(root_logger.handlers):
        root_logger.removeHandler(handler)
        handler.close()

    formatter = logging.Formatter(
        '%(asctime)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    # 10MB max, keep 5 backups
    if log_file_path:
        try:
            file_handler = logging.handlers.RotatingFileHandler(
                log_file_path,
                maxBytes=10 * 1024 * 1024,
                backupCount=5,
                encoding='utf-8'
            )
            file_handler.setLevel(level)
            file_handler.setFormatter(formatter)
            root_logger.addHandler(file_handler)
            root_logger.info(f"Logging to file: {log_file_path}")
        except (OSError, PermissionError) as e:
            root_logger.warning(f"Cannot create log file at {log_file_path}: {e}")
            root_logger.warning("Logging to console only")
            log_file_path = None
    else:
        root_logger.info("Logging to console only (file logging unavailable)")

    return str(log_file_path) if log_file_path else None
