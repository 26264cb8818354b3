import logging
import struct
from abc import ABC, abstractmethod
from pathlib import Path
from typing import BinaryIO, Optional

import numpy as np

from config import settings
from utilities.board import Dims
from utilities.tablebase import Tablebase, build, index_size

logger = logging.getLogger("rookmate.storage")

MAGIC = b"RKTB"
VERSION = 1
# magic, version, m, n, reserved
HEADER = struct.Struct("<4sHHHI")
MAX_SIDE = 0xFFFF


class TablebaseFormatError(ValueError):
    pass


def _header(dims: Dims) -> bytes:
    if dims.m > MAX_SIDE or dims.n > MAX_SIDE:
        raise TablebaseFormatError(f"Board {dims} does not fit the 16-bit header fields")
    return HEADER.pack(MAGIC, VERSION, dims.m, dims.n, 0)


def dumps(tb: Tablebase) -> bytes:
    return _header(tb.dims) + tb.values.astype("<u2", copy=False).tobytes()


def loads(data: bytes) -> Tablebase:
    if len(data) < HEADER.size:
        raise TablebaseFormatError(f"Truncated header: {len(data)} of {HEADER.size} bytes")
    magic, version, m, n, reserved = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise TablebaseFormatError(f"Bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise TablebaseFormatError(f"Unsupported version {version}, expected {VERSION}")
    if reserved != 0:
        raise TablebaseFormatError(f"Reserved header field is {reserved}, expected 0")
    try:
        dims = Dims(m, n)
    except ValueError as exc:
        raise TablebaseFormatError(f"Header dims {m}x{n} are invalid: {exc}") from exc

    expected = index_size(dims) * 2
    payload = len(data) - HEADER.size
    if payload < expected:
        raise TablebaseFormatError(f"Truncated payload: {payload} of {expected} bytes for {dims}")
    if payload > expected:
        raise TablebaseFormatError(f"{payload - expected} trailing bytes after the {dims} payload")

    values = np.frombuffer(data, dtype="<u2", offset=HEADER.size).astype(np.uint16)
    return Tablebase(dims, values)


def save(tb: Tablebase, sink: Path | str | BinaryIO) -> None:
    data = dumps(tb)
    if isinstance(sink, (str, Path)):
        Path(sink).write_bytes(data)
        logger.debug(f"Saved {tb.dims} tablebase to {sink} ({len(data)} bytes)")
    else:
        sink.write(data)


def load(source: Path | str | BinaryIO) -> Tablebase:
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    else:
        data = source.read()
    return loads(data)


class TablebaseStore(ABC):
    """Keyed by board; implementations only decide where tablebases live."""

    @abstractmethod
    def get(self, dims: Dims) -> Optional[Tablebase]:
        pass

    @abstractmethod
    def put(self, tb: Tablebase) -> None:
        pass

    @abstractmethod
    def delete(self, dims: Dims) -> None:
        pass

    def get_or_build(self, dims: Dims, workers: int | None = None) -> Tablebase:
        tb = self.get(dims)
        if tb is not None:
            logger.debug(f"Cache hit for {dims}")
            return tb
        logger.debug(f"Cache miss for {dims}, building")
        tb = build(dims, workers)
        self.put(tb)
        return tb


class MemoryStore(TablebaseStore):
    def __init__(self):
        self._tables: dict[Dims, Tablebase] = {}

    def get(self, dims: Dims) -> Optional[Tablebase]:
        return self._tables.get(dims)

    def put(self, tb: Tablebase) -> None:
        self._tables[tb.dims] = tb

    def delete(self, dims: Dims) -> None:
        self._tables.pop(dims, None)


class DiskStore(TablebaseStore):
    """One RKTB file per board under ``directory``; unreadable files count as misses."""

    def __init__(self, directory: Path | str | None = None):
        self.directory = Path(directory or settings.CACHE_DIR)

    def path_for(self, dims: Dims) -> Path:
        return self.directory / f"krk_{dims}.rktb"

    def get(self, dims: Dims) -> Optional[Tablebase]:
        path = self.path_for(dims)
        if not path.exists():
            return None
        try:
            return load(path)
        except (TablebaseFormatError, OSError) as e:
            logger.error(f"Ignoring unreadable cache file {path}: {e}")
            return None

    def put(self, tb: Tablebase) -> None:
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
            save(tb, self.path_for(tb.dims))
        except OSError as e:
            logger.error(f"Disk save error: {e}")

    def delete(self, dims: Dims) -> None:
        self.path_for(dims).unlink(missing_ok=True)


def default_store() -> TablebaseStore:
    return DiskStore() if settings.USE_CACHE else MemoryStore()
