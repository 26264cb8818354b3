"""Retrograde solution of every K+R vs K position on a fixed board.

Values are stored one 16-bit word per index; see ``index`` for the layout.
A word below DRAW is the number of plies to mate with best play from both sides.
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np

from config import settings
from utilities.board import (
    KING_STEPS,
    Dims,
    IllegalPositionError,
    Move,
    Position,
    Side,
    Square,
    TerminalKind,
    classify_terminal,
    successors,
)
from utilities.dependencies import available_memory, format_size, resolve_workers

logger = logging.getLogger("rookmate.tablebase")

ILLEGAL = 0xFFFF
DRAW = 0xFFFE
MAX_PLIES = 0xFFFD


class DimsMismatchError(ValueError):
    pass


class NotWinningError(ValueError):
    pass


class NoWinsError(ValueError):
    pass


class ValueKind(Enum):
    ILLEGAL = "illegal"
    DRAW = "draw"
    WIN = "win"


@dataclass(frozen=True)
class Value:
    kind: ValueKind
    plies: Optional[int] = None

    @classmethod
    def from_word(cls, word: int) -> "Value":
        if word == ILLEGAL:
            return cls(ValueKind.ILLEGAL)
        if word == DRAW:
            return cls(ValueKind.DRAW)
        return cls(ValueKind.WIN, int(word))

    @property
    def is_win(self) -> bool:
        return self.kind == ValueKind.WIN

    def __str__(self) -> str:
        return f"win in {self.plies} plies" if self.is_win else self.kind.value


@dataclass(frozen=True)
class BuildMeta:
    iterations: int
    wins: int
    draws: int
    illegal: int
    checkmates: int = 0
    seconds: float = 0.0

    @classmethod
    def from_values(cls, values: np.ndarray, iterations: int | None = None) -> "BuildMeta":
        wins_mask = values < DRAW
        if iterations is None:
            iterations = int(values[wins_mask].max()) if wins_mask.any() else 0
        return cls(
            iterations=iterations,
            wins=int(np.count_nonzero(wins_mask)),
            draws=int(np.count_nonzero(values == DRAW)),
            illegal=int(np.count_nonzero(values == ILLEGAL)),
            checkmates=int(np.count_nonzero(values == 0)),
        )


@dataclass(frozen=True)
class UResult:
    dims: Dims
    u_moves: int
    witness: Position


# --- Index layout: ((bk*S + wk)*(S+1) + wr_or_S)*2 + stm_bit ---

def index_size(dims: Dims) -> int:
    s = dims.squares
    return 2 * s * s * (s + 1)


def _square_index(sq: Square, dims: Dims) -> int:
    return (sq.row - 1) * dims.m + (sq.col - 1)


def _square_at(i: int, dims: Dims) -> Square:
    return Square(i % dims.m + 1, i // dims.m + 1)


def index(pos: Position, dims: Dims) -> int:
    for sq in pos.squares():
        if not dims.contains(sq):
            raise DimsMismatchError(f"Square {sq} lies outside the {dims} board")
    s = dims.squares
    wr = s if pos.wr is None else _square_index(pos.wr, dims)
    bk = _square_index(pos.bk, dims)
    wk = _square_index(pos.wk, dims)
    return ((bk * s + wk) * (s + 1) + wr) * 2 + int(pos.stm)


def deindex(i: int, dims: Dims) -> Position:
    if not 0 <= i < index_size(dims):
        raise IndexError(f"Index {i} out of range for {dims}")
    s = dims.squares
    stm, rest = i & 1, i >> 1
    rest, wr = divmod(rest, s + 1)
    bk, wk = divmod(rest, s)
    return Position(
        wk=_square_at(wk, dims),
        wr=None if wr == s else _square_at(wr, dims),
        bk=_square_at(bk, dims),
        stm=Side(stm),
    )


def _encode(bk, wk, wr, stm: int, s: int):
    return ((bk * s + wk) * (s + 1) + wr) * 2 + stm


def _rook_hits(rc, rr, tc, tr, kc, kr):
    """Vectorized rook attack on (tc, tr); the white king at (kc, kr) is the only blocker."""
    same_col = (rc == tc) & (rr != tr)
    same_row = (rr == tr) & (rc != tc)
    blocked_col = (kc == tc) & (kr > np.minimum(rr, tr)) & (kr < np.maximum(rr, tr))
    blocked_row = (kr == tr) & (kc > np.minimum(rc, tc)) & (kc < np.maximum(rc, tc))
    return (same_col & ~blocked_col) | (same_row & ~blocked_row)


def _edge_dtype(dims: Dims):
    return np.int32 if index_size(dims) < 2**31 else np.int64


@dataclass
class _Chunk:
    legal: np.ndarray
    check: np.ndarray
    white_src: np.ndarray
    white_dst: np.ndarray
    black_src: np.ndarray
    black_dst: np.ndarray


def _expand_chunk(dims: Dims, start: int, stop: int) -> _Chunk:
    """Legality and move edges for indices [start, stop)."""
    m, n, s = dims.m, dims.n, dims.squares
    idx = np.arange(start, stop, dtype=np.int64)
    stm = idx & 1
    rest = idx >> 1
    wr = rest % (s + 1)
    rest = rest // (s + 1)
    wk = rest % s
    bk = rest // s

    has_rook = wr < s
    wr_safe = np.where(has_rook, wr, 0)
    bkc, bkr = bk % m, bk // m
    wkc, wkr = wk % m, wk // m
    wrc, wrr = wr_safe % m, wr_safe // m

    distinct = (bk != wk) & (~has_rook | ((wr != bk) & (wr != wk)))
    apart = np.maximum(np.abs(bkc - wkc), np.abs(bkr - wkr)) >= 2
    check = has_rook & _rook_hits(wrc, wrr, bkc, bkr, wkc, wkr)
    legal = distinct & apart & ~((stm == 0) & check)

    white_src, white_dst, black_src, black_dst = [], [], [], []

    # White to move, rook on the board (rook-less positions are terminal draws)
    sel = legal & (stm == 0) & has_rook
    src = idx[sel]
    b, k, r = bk[sel], wk[sel], wr[sel]
    bc, br, kc, kr, rc, rr = bkc[sel], bkr[sel], wkc[sel], wkr[sel], wrc[sel], wrr[sel]

    for dc, dr in KING_STEPS:
        tc, tr = kc + dc, kr + dr
        ok = (tc >= 0) & (tc < m) & (tr >= 0) & (tr < n)
        ok &= np.maximum(np.abs(tc - bc), np.abs(tr - br)) >= 2
        to = tr * m + tc
        ok &= to != r
        white_src.append(src[ok])
        white_dst.append(_encode(b[ok], to[ok], r[ok], 1, s))

    for tc in range(m):
        ok = rc != tc
        lo, hi = np.minimum(rc, tc), np.maximum(rc, tc)
        # origin excluded, target included: a king there blocks or is occupied
        ok &= ~((kr == rr) & (kc >= lo) & (kc <= hi))
        ok &= ~((br == rr) & (bc >= lo) & (bc <= hi))
        to = rr * m + tc
        white_src.append(src[ok])
        white_dst.append(_encode(b[ok], k[ok], to[ok], 1, s))

    for tr in range(n):
        ok = rr != tr
        lo, hi = np.minimum(rr, tr), np.maximum(rr, tr)
        ok &= ~((kc == rc) & (kr >= lo) & (kr <= hi))
        ok &= ~((bc == rc) & (br >= lo) & (br <= hi))
        to = tr * m + rc
        white_src.append(src[ok])
        white_dst.append(_encode(b[ok], k[ok], to[ok], 1, s))

    # Black to move, rook on the board
    sel = legal & (stm == 1) & has_rook
    src = idx[sel]
    k, r = wk[sel], wr[sel]
    bc, br, kc, kr, rc, rr = bkc[sel], bkr[sel], wkc[sel], wkr[sel], wrc[sel], wrr[sel]
    defended = np.maximum(np.abs(rc - kc), np.abs(rr - kr)) <= 1

    for dc, dr in KING_STEPS:
        tc, tr = bc + dc, br + dr
        ok = (tc >= 0) & (tc < m) & (tr >= 0) & (tr < n)
        ok &= np.maximum(np.abs(tc - kc), np.abs(tr - kr)) >= 2
        to = tr * m + tc
        captures = to == r
        ok &= np.where(captures, ~defended, ~_rook_hits(rc, rr, tc, tr, kc, kr))
        new_r = np.where(captures, s, r)
        black_src.append(src[ok])
        black_dst.append(_encode(to[ok], k[ok], new_r[ok], 0, s))

    dtype = _edge_dtype(dims)
    return _Chunk(
        legal=legal,
        check=check,
        white_src=np.concatenate(white_src).astype(dtype),
        white_dst=np.concatenate(white_dst).astype(dtype),
        black_src=np.concatenate(black_src).astype(dtype),
        black_dst=np.concatenate(black_dst).astype(dtype),
    )


def estimate_build_bytes(dims: Dims) -> int:
    """Rough peak footprint: value words plus source/destination edge arrays."""
    size = index_size(dims)
    edges_per_index = (8 + dims.m + dims.n) // 2 + 4
    return size * 2 + size * edges_per_index * 2 * np.dtype(_edge_dtype(dims)).itemsize


def build(dims: Dims, workers: int | None = None) -> "Tablebase":
    """Solve every position of ``dims`` by retrograde analysis.

    Move edges are generated in chunks (optionally on several threads, numpy releases
    the GIL); the ply-by-ply propagation itself is sequential, so the result does not
    depend on the worker count.
    """
    workers = resolve_workers(workers)
    size = index_size(dims)
    needed = estimate_build_bytes(dims)
    if needed > available_memory():
        logger.warning(
            f"Building {dims} needs about {format_size(needed)}, "
            f"more than the {format_size(available_memory())} available"
        )

    started = time.perf_counter()
    chunk = settings.CHUNK_SIZE
    ranges = [(lo, min(lo + chunk, size)) for lo in range(0, size, chunk)]
    if workers > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda r: _expand_chunk(dims, *r), ranges))
    else:
        chunks = [_expand_chunk(dims, lo, hi) for lo, hi in ranges]

    legal = np.concatenate([c.legal for c in chunks])
    check = np.concatenate([c.check for c in chunks])
    white_src = np.concatenate([c.white_src for c in chunks])
    white_dst = np.concatenate([c.white_dst for c in chunks])
    black_src = np.concatenate([c.black_src for c in chunks])
    black_dst = np.concatenate([c.black_dst for c in chunks])
    del chunks

    s = dims.squares
    idx = np.arange(size, dtype=np.int64)
    black_to_move = (idx & 1) == 1
    has_rook = ((idx >> 1) % (s + 1)) < s
    del idx

    # unsolved counters start at the legal move count of each Black-to-move position
    counters = np.bincount(black_src, minlength=size).astype(np.int32)
    mates = legal & black_to_move & has_rook & check & (counters == 0)

    values = np.full(size, ILLEGAL, dtype=np.uint16)
    values[legal] = DRAW
    values[mates] = 0
    logger.debug(f"{dims}: {int(mates.sum())} checkmates, "
                 f"{white_src.size + black_src.size} move edges")

    frontier = mates
    ply = 0
    while frontier.any():
        ply += 1
        if ply > MAX_PLIES:
            raise OverflowError(f"Mate distance on {dims} exceeds the 16-bit value range")
        if ply % 2 == 1:
            # White to move: the first solved successor gives the shortest mate
            hits = np.unique(white_src[frontier[white_dst]])
            solved = hits[values[hits] == DRAW]
        else:
            # Black to move: solved once every successor is a White win
            hits, count = np.unique(black_src[frontier[black_dst]], return_counts=True)
            counters[hits] -= count.astype(np.int32)
            solved = hits[counters[hits] == 0]
        values[solved] = ply
        frontier = np.zeros(size, dtype=bool)
        frontier[solved] = True
        logger.debug(f"{dims}: ply {ply}, {solved.size} new wins")

    elapsed = time.perf_counter() - started
    # the last pass found nothing new
    meta = replace(BuildMeta.from_values(values, iterations=max(ply - 1, 0)), seconds=elapsed)
    logger.info(
        f"Built {dims}: {meta.wins} wins, {meta.draws} draws, {meta.illegal} illegal, "
        f"{meta.iterations} plies, {elapsed:.2f}s ({workers} workers)"
    )
    return Tablebase(dims, values, meta)


class Tablebase:
    """Solved value array for one board; immutable once built."""

    def __init__(self, dims: Dims, values: np.ndarray, meta: BuildMeta | None = None):
        if values.shape != (index_size(dims),):
            raise ValueError(
                f"Value array of length {values.size} does not match {dims} "
                f"({index_size(dims)} indices)"
            )
        self.dims = dims
        self.values = np.array(values, dtype=np.uint16)
        self.values.flags.writeable = False
        self.meta = meta or BuildMeta.from_values(self.values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Tablebase):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        return f"Tablebase({self.dims}, wins={self.meta.wins})"

    def word(self, pos: Position) -> int:
        return int(self.values[index(pos, self.dims)])

    def value(self, pos: Position) -> Value:
        return Value.from_word(self.word(pos))

    def _winning_word(self, pos: Position) -> int:
        word = self.word(pos)
        if word == ILLEGAL:
            raise IllegalPositionError(f"Illegal position on {self.dims}: {pos}")
        if word == DRAW:
            raise NotWinningError(f"Position is a draw: {pos}")
        return word

    def dtm_moves(self, pos: Position) -> Optional[int]:
        """White moves until mate, None for a draw."""
        word = self.word(pos)
        if word == ILLEGAL:
            raise IllegalPositionError(f"Illegal position on {self.dims}: {pos}")
        if word == DRAW:
            return None
        return (word + 1) // 2 if pos.stm == Side.WHITE else word // 2

    def best_move(self, pos: Position) -> Move:
        """Fastest mate for White, longest resistance for Black; first in move order on ties."""
        word = self._winning_word(pos)
        if word == 0:
            raise NotWinningError(f"Position is already checkmate: {pos}")
        best, best_word = None, None
        for mv, nxt in successors(pos, self.dims):
            w = self.word(nxt)
            if w >= DRAW:
                continue
            if best_word is None or (w < best_word if pos.stm == Side.WHITE else w > best_word):
                best, best_word = mv, w
        if best is None or best_word != word - 1:
            raise RuntimeError(f"Tablebase inconsistent at {pos}: no successor at ply {word - 1}")
        return best

    def line(self, pos: Position) -> list[Move]:
        self._winning_word(pos)
        moves = []
        while classify_terminal(pos, self.dims) != TerminalKind.CHECKMATE:
            mv = self.best_move(pos)
            moves.append(mv)
            pos = next(p for m, p in successors(pos, self.dims) if m == mv)
        return moves

    def _white_wins(self) -> np.ndarray:
        # White-to-move indices are the even ones
        return self.values[0::2]

    def max_dtm(self) -> UResult:
        white = self._white_wins()
        wins = white < DRAW
        if not wins.any():
            raise NoWinsError(f"No winning White-to-move position on {self.dims}: no wins")
        top = int(white[wins].max())
        first = int(np.flatnonzero(white == top)[0]) * 2
        return UResult(self.dims, (top + 1) // 2, deindex(first, self.dims))

    def positions_over(self, moves: int) -> list[Position]:
        """White-to-move wins needing more than ``moves`` White moves, in index order."""
        white = self._white_wins()
        over = np.flatnonzero((white < DRAW) & ((white.astype(np.int64) + 1) // 2 > moves))
        return [deindex(int(i) * 2, self.dims) for i in over]

    def legal_positions(self):
        """Iterate (index, position) over every legal index."""
        for i in np.flatnonzero(self.values != ILLEGAL):
            yield int(i), deindex(int(i), self.dims)

