"""
Configuration utilities for the engine.

This module provides utilities for loading and validating configuration
from environment variables, for parsing lengths written with unit suffixes
and for setting up logging.
"""
import os
import re
import logging
import logging.handlers
from pathlib import Path
from typing import Any, Optional

from dotenv import load_dotenv

# Load environment variables from .env file if it exists
load_dotenv()


class ConfigError(Exception):
    """Raised when there is an error in the configuration."""
    pass


def get_env_variable(name: str, default: Any = None, required: bool = False) -> str:
    """
    Get an environment variable.

    Args:
        name: Name of the environment variable
        default: Default value if the variable is not set
        required: If True, raises ConfigError if the variable is not set

    Returns:
        The value of the environment variable or the default value

    Raises:
        ConfigError: If the variable is required but not set
    """
    value = os.getenv(name, default)
    if required and value is None:
        raise ConfigError(f"Required environment variable {name} is not set")
    return value


def get_bool_env(name: str, default: bool = False) -> bool:
    """
    Get a boolean value from an environment variable.

    Args:
        name: Name of the environment variable
        default: Default value if the variable is not set

    Returns:
        The boolean value of the environment variable
    """
    value = os.getenv(name, '').lower()
    if value in ('true', 't', '1', 'yes', 'y'):
        return True
    elif value in ('false', 'f', '0', 'no', 'n'):
        return False
    return default


def get_int_env(name: str, default: int = 0) -> int:
    """
    Get an integer value from an environment variable.

    Args:
        name: Name of the environment variable
        default: Default value if the variable is not set or invalid

    Returns:
        The integer value of the environment variable or the default value
    """
    try:
        return int(os.getenv(name, str(default)))
    except (ValueError, TypeError):
        return default


def get_float_env(name: str, default: float = 0.0) -> float:
    """
    Get a float value from an environment variable.

    Args:
        name: Name of the environment variable
        default: Default value if the variable is not set or invalid

    Returns:
        The float value of the environment variable or the default value
    """
    try:
        return float(os.getenv(name, repr(default)))
    except (ValueError, TypeError):
        return default


def ensure_directory_exists(path: Path) -> Path:
    """
    Ensure that a directory exists, creating it if necessary.

    Args:
        path: Path to the directory

    Returns:
        The path to the directory

    Raises:
        ConfigError: If the directory cannot be created or is not writable
    """
    try:
        path.mkdir(parents=True, exist_ok=True)
        if not os.access(path, os.W_OK):
            raise ConfigError(f"Directory is not writable: {path}")
        return path
    except OSError as e:
        raise ConfigError(f"Failed to create directory {path}: {e}")


# Length units accepted on the command line and in config files, in meters.
LENGTH_UNITS = {
    'm': 1.0,
    'cm': 1e-2,
    'mm': 1e-3,
    'um': 1e-6,
}

_QUANTITY = re.compile(r'^\s*([-+0-9.eE]+)\s*([a-zA-Z]*)\s*$')
_INVERSE = re.compile(r'^\s*([-+0-9.eE]+)\s*(?:/|1/|per\s+)?\s*([a-zA-Z]*)\s*$')


def parse_length(value: Any) -> float:
    """
    Convert a length such as ``'5e-5 m'`` or ``'50mm'`` to meters.

    Bare numbers are read as meters.

    Raises:
        ConfigError: If the text cannot be parsed or the unit is unknown
    """
    if isinstance(value, (int, float)):
        return float(value)
    match = _QUANTITY.match(str(value))
    if not match:
        raise ConfigError(f"Cannot parse length: {value!r}")
    number, unit = match.groups()
    unit = unit or 'm'
    if unit not in LENGTH_UNITS:
        raise ConfigError(f"Unknown length unit {unit!r} in {value!r}")
    try:
        return float(number) * LENGTH_UNITS[unit]
    except ValueError:
        raise ConfigError(f"Cannot parse length: {value!r}")


def parse_inverse_length(value: Any) -> float:
    """
    Convert an inverse length such as ``'0.1414/mm'`` to 1/m.

    Bare numbers are read as 1/m.

    Raises:
        ConfigError: If the text cannot be parsed or the unit is unknown
    """
    if isinstance(value, (int, float)):
        return float(value)
    match = _INVERSE.match(str(value))
    if not match:
        raise ConfigError(f"Cannot parse inverse length: {value!r}")
    number, unit = match.groups()
    unit = unit or 'm'
    if unit not in LENGTH_UNITS:
        raise ConfigError(f"Unknown length unit {unit!r} in {value!r}")
    try:
        return float(number) / LENGTH_UNITS[unit]
    except ValueError:
        raise ConfigError(f"Cannot parse inverse length: {value!r}")


def configure_logging(level: Optional[str] = None, log_file: Optional[str] = None) -> None:
    """
    Configure the logging system based on environment variables.

    Args:
        level: Overrides LOG_LEVEL when given
        log_file: Overrides LOG_FILE when given; an empty string disables
            the rotating file handler
    """
    log_level = (level or get_env_variable('LOG_LEVEL', 'INFO')).upper()
    log_format = get_env_variable(
        'LOG_FORMAT',
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    if log_file is None:
        log_file = get_env_variable('LOG_FILE', 'logs/eddycorner.log')

    handlers = [logging.StreamHandler()]
    if log_file:
        # Ensure log directory exists
        ensure_directory_exists(Path(log_file).parent)
        handlers.append(
            logging.handlers.RotatingFileHandler(
                log_file,
                maxBytes=get_int_env('LOG_MAX_BYTES', 10 * 1024 * 1024),  # 10MB
                backupCount=get_int_env('LOG_BACKUP_COUNT', 10),
                encoding='utf-8'
            )
        )

    logging.basicConfig(level=log_level, format=log_format, handlers=handlers, force=True)
