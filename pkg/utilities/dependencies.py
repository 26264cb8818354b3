import logging
import os
from pathlib import Path

import psutil

from config import settings

logger = logging.getLogger("rookmate")


def check_path(value: Path | str, check_existence: bool = True) -> Path:
    try:
        # explicitly converts it to Path
        if isinstance(value, str):
            value = Path(value)

        value = Path(os.path.expanduser(value)).resolve()

        if check_existence and not value.exists():
            raise ValueError(f"Path '{value}' does not exist")

        return value

    except (TypeError, ValueError, OSError) as exc:
        logger.error(f"Invalid path specified: {value}", exc_info=exc)
        raise


def resolve_workers(requested: int | None = None) -> int:
    """Worker count for the tablebase build: explicit value, then settings, then physical cores."""
    if requested is None:
        requested = settings.RKTB_WORKERS
    if requested is None:
        requested = psutil.cpu_count(logical=False) or 1
    if requested < 1:
        raise ValueError(f"Worker count must be positive, got {requested}")
    return requested


def available_memory() -> int:
    """Bytes of memory psutil reports as available right now."""
    return psutil.virtual_memory().available


def format_size(size: int) -> str:
    """Format file size in human readable format."""
    for unit in ['B', 'KB', 'MB', 'GB', 'TB']:
        if size < 1024.0:
            return f"{size:.1f} {unit}"
        size /= 1024.0
    return f"{size:.1f} PB"


def parse_range(text: str) -> range:
    """'3-8' -> range(3, 9); '5' -> range(5, 6)."""
    try:
        if "-" in text:
            lo, hi = (int(part) for part in text.split("-", 1))
        else:
            lo = hi = int(text)
    except ValueError:
        raise ValueError(f"Bad range '{text}', expected N or LO-HI")
    if lo < 1 or hi < lo:
        raise ValueError(f"Bad range '{text}', expected 1 <= LO <= HI")
    return range(lo, hi + 1)


def fail(exc: Exception | str, status: int = 1) -> int:
    """Report a command failure the way every handler does: log it, print 'Error: ...', return the exit status."""
    message = str(exc)
    logger.error(message)
    print(f"Error: {message}")
    return status


def emit(text: str, keyvalues: list[str]) -> None:
    """Human-readable block followed by the machine-readable key=value lines."""
    print(text)
    print()
    print("\n".join(keyvalues))
