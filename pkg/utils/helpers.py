"""
Common helper functions and utilities for the Wronski count toolkit.
"""

import os
import sys
import yaml
import logging
from pathlib import Path
from enum import Enum


DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent / "config" / "settings.yaml"


class Route(Enum):
    """Independent ways of obtaining the number of classes."""
    FORMULA = "formula"
    SCHUBERT = "schubert"
    SING = "sing"
    REP = "rep"
    ORBITS = "orbits"


class SpecRegime(Enum):
    """Which statement about the count applies to a problem spec."""
    SINGLE_POINT = "SINGLE_POINT"
    VANISHING = "VANISHING"
    BOUNDARY = "BOUNDARY"
    GENERIC = "GENERIC"


class ExitCode(Enum):
    """Process exit codes of the command-line surface."""
    OK = 0
    DISAGREEMENT = 1
    COVERAGE_SHORTFALL = 2


# ============= ERRORS =============

class WronskiError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(WronskiError, ValueError):
    """An argument is outside the range an operation accepts."""


class UnsupportedCaseError(WronskiError):
    """The requested computation is not defined for this case."""


class InternalConsistencyError(WronskiError):
    """An identity that must hold failed; this is a bug, not a result."""


class InvalidConfigurationError(WronskiError, ValueError):
    """The critical points z are not pairwise distinct."""


class DomainError(WronskiError, ValueError):
    """A point t lies outside the configuration domain T."""

    def __init__(self, message: str, pair: tuple = None):
        super().__init__(message)
        self.pair = pair


class DegeneratePointError(WronskiError):
    """The local Wronskian identity does not apply at the requested point."""


class NotASolutionError(WronskiError):
    """A plane does not solve the Fuchsian equation built for it."""


class PreconditionError(WronskiError):
    """A documented precondition of an operation does not hold."""


class NotCriticalError(WronskiError):
    """An orbit fails the residue test of the reconstruction."""


class ReconstructionError(WronskiError):
    """A reconstructed plane does not reproduce the prescribed Wronskian."""


# ============= CONFIG / LOGGING =============

def load_config(config_path: str = None) -> dict:
    """
    Load configuration from a YAML (or JSON) file.

    Args:
        config_path: Path to the configuration file (default: config/settings.yaml)

    Returns:
        Dictionary containing configuration settings
    """
    path = Path(config_path) if config_path else DEFAULT_CONFIG_PATH
    if config_path is None and not path.exists():
        logging.warning(f"Default settings not found at {path}; using built-in defaults")
        return {}
    try:
        with open(path, 'r', encoding='utf-8') as f:
            config = yaml.safe_load(f)
        return config or {}
    except FileNotFoundError:
        logging.error(f"Configuration file not found: {path}")
        raise
    except yaml.YAMLError as e:
        logging.error(f"Error parsing configuration file: {e}")
        raise


def setup_logging(config: dict, level: str = None) -> None:
    """
    Set up logging configuration.

    Logs go to stderr so that tables and reports on stdout stay clean.

    Args:
        config: Configuration dictionary
        level: Optional level name overriding the configured one
    """
    log_config = config.get('logging', {})
    log_level = (level or log_config.get('level', 'INFO')).upper()

    handlers = [logging.StreamHandler(sys.stderr)]
    if log_config.get('save_logs', False):
        log_file = log_config.get('log_file', 'data/wronski.log')
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(
        level=getattr(logging, log_level, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True
    )


def thread_count(config: dict) -> int:
    """
    Number of worker threads, honouring the WRONSKI_THREADS cap.

    Args:
        config: Configuration dictionary

    Returns:
        Positive thread count
    """
    configured = config.get('parallelism', {}).get('threads', 1)
    env_value = os.environ.get('WRONSKI_THREADS')
    if env_value:
        try:
            configured = int(env_value)
        except ValueError:
            logging.warning(f"Ignoring non-integer WRONSKI_THREADS={env_value!r}")
    return max(1, int(configured))


def format_duration_ms(milliseconds: float) -> str:
    """
    Format a duration in milliseconds to a human-readable string.

    Args:
        milliseconds: Duration in milliseconds

    Returns:
        Formatted string (e.g., '850 ms', '2.4 s', '3m 12s')
    """
    if milliseconds < 1000:
        return f"{milliseconds:.0f} ms"
    seconds = milliseconds / 1000
    if seconds < 60:
        return f"{seconds:.1f} s"
    minutes = int(seconds // 60)
    return f"{minutes}m {int(seconds % 60)}s"


def parse_int_list(text: str) -> list:
    """
    Parse a comma separated list of integers (e.g. '2,2,1').

    Args:
        text: Comma separated integers

    Returns:
        List of ints
    """
    try:
        return [int(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise InvalidArgumentError(f"Expected comma separated integers, got {text!r}")


def parse_complex_list(text: str) -> list:
    """
    Parse complex numbers written as 're,im' pairs separated by ';'.

    Args:
        text: e.g. '0,0;1,0;0.5,-1'

    Returns:
        List of complex numbers
    """
    values = []
    for chunk in text.split(';'):
        if not chunk.strip():
            continue
        parts = chunk.split(',')
        if len(parts) != 2:
            raise InvalidArgumentError(f"Complex number must be 're,im', got {chunk!r}")
        try:
            values.append(complex(float(parts[0]), float(parts[1])))
        except ValueError:
            raise InvalidArgumentError(f"Complex number must be 're,im', got {chunk!r}")
    return values
