import logging
from rich.console import Console
from rich.logging import RichHandler
from config import settings

FILE_FORMAT = "%(asctime)s [%(levelname)s] [%(name)s]: %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# everything below the project logger hangs off this name
ROOT_LOGGER = "rookmate"


def _has_handler(target: logging.Logger, kind: type) -> bool:
    return any(isinstance(h, kind) for h in target.handlers)


def initialize_logging(debug: bool | None = None) -> logging.Logger:
    """Attach console (and, in debug mode, file) handlers to the project logger.

    stdout stays clean for command output, so the console handler writes to stderr.
    Safe to call more than once.
    """
    if debug is None:
        debug = settings.DEBUG

    target_logger = logging.getLogger(ROOT_LOGGER)
    target_logger.setLevel(logging.DEBUG if debug else logging.INFO)
    target_logger.propagate = False

    if not _has_handler(target_logger, RichHandler):
        console_handler = RichHandler(
            console=Console(stderr=True),
            show_path=False,
            rich_tracebacks=debug,
        )
        console_handler.setLevel(logging.DEBUG if debug else logging.INFO)
        target_logger.addHandler(console_handler)

    if debug and not _has_handler(target_logger, logging.FileHandler):
        file_handler = logging.FileHandler(settings.LOG_FILE, encoding="utf-8")
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(FILE_FORMAT, datefmt=DATE_FORMAT))
        target_logger.addHandler(file_handler)

    return target_logger
