import logging
from logging import INFO, getLogger

import logfire
from rich.console import Console
from rich.logging import RichHandler

logger = getLogger(__name__)
logger.setLevel(INFO)
logger.propagate = False

# stdout is reserved for JSON output of the CLI, console logs go to stderr
console_handler = RichHandler(console=Console(stderr=True), show_path=False)
console_handler.setLevel(INFO)
logger.addHandler(console_handler)

try:
    logfire.configure(
        send_to_logfire="if-token-present",
        console=False,
        scrubbing=False,
    )
    logfire_handler = logfire.LogfireLoggingHandler()
    logger.addHandler(logfire_handler)

except Exception as e:
    # Fallback in case logfire configuration fails
    logger.warning(f"Failed to configure logfire: {e}")


def set_quiet(quiet: bool) -> None:
    """
    Raise the logger threshold to WARNING when `quiet` is set, restore INFO otherwise.
    """
    level = logging.WARNING if quiet else INFO
    logger.setLevel(level)
    console_handler.setLevel(level)
