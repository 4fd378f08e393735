"""Logging setup shared by the library and the CLI."""

import logging

from rich.console import Console
from rich.logging import RichHandler

ROOT_LOGGER = "wfsem"


def get_logger(name: str) -> logging.Logger:
    """Return a logger under the wfsem hierarchy."""
    if not name.startswith(ROOT_LOGGER):
        name = f"{ROOT_LOGGER}.{name}"
    return logging.getLogger(name)


def setup_logging(verbose: bool = False, quiet: bool = False,
                  console: Console = None) -> logging.Logger:
    """
    Install a rich handler on the wfsem root logger.

    Args:
        verbose: Log at DEBUG level
        quiet: Only log warnings and errors
        console: Console to log to (stderr by default)

    Returns:
        The configured root logger
    """
    level = logging.INFO
    if verbose:
        level = logging.DEBUG
    elif quiet:
        level = logging.WARNING

    logger = logging.getLogger(ROOT_LOGGER)
    logger.setLevel(level)
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)

    handler = RichHandler(
        console=console or Console(stderr=True),
        show_path=False,
        rich_tracebacks=verbose,
    )
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    logger.propagate = False
    return logger
