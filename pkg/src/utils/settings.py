"""
Settings and logging helpers.

This module loads the settings.ini file shared by every component and
configures application logging from its [LOGGING] section.
"""

import configparser
import logging
import sys
from pathlib import Path


DEFAULT_LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def load_settings(config_path: str = "settings.ini") -> configparser.ConfigParser:
    """
    Load the configuration file.

    Args:
        config_path: Path to the configuration file

    Returns:
        Parsed configuration (empty when the file does not exist)
    """
    config = configparser.ConfigParser()

    if Path(config_path).exists():
        config.read(config_path)
    else:
        logging.getLogger(__name__).warning(
            f"Configuration file {config_path} not found, using defaults")

    return config


def setup_logging(config_path: str = "settings.ini") -> None:
    """
    Set up logging configuration.

    Args:
        config_path: Path to the configuration file
    """
    config = configparser.ConfigParser()
    if Path(config_path).exists():
        config.read(config_path)

    log_level = config.get('LOGGING', 'level', fallback='INFO')
    log_format = config.get('LOGGING', 'format', fallback=DEFAULT_LOG_FORMAT)

    logging.basicConfig(
        level=getattr(logging, log_level.upper()),
        format=log_format,
        handlers=[
            logging.StreamHandler(sys.stdout)
        ]
    )
